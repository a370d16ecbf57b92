"""Boundary values: the inverse of the Poisson transform.

For ``z**2`` not in ``{0, 1}`` every edge ``e = (u, v)`` pointing away from
``o`` determines

    c(e) = (z f(v) - f(u)) / ((z**2 - 1) z**depth(u)),

and ``f`` is a ``chi(z)``-eigenfunction exactly when these coefficients obey
the flow law and sum to ``f(o)`` at the root.  On regular trees the cylinder
masses can also be recovered analytically, as limits of normalised sphere
sums; both routes live here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DepthError, DomainError, ForbiddenParameterError, NonRegularTreeError, RegimeError
from .measure import BoundaryMeasure, ClopenSet, EdgeCoefficients, flow_away
from .poisson import (
    VertexFunction,
    check_power_range,
    exact_parameter,
    poisson_transform,
    power_table,
    zpow,
)
from .tree import Tree

__all__ = [
    "EdgeCoefficients",
    "EigenReport",
    "LimitTable",
    "beta",
    "boundary_measure",
    "chain_formula_check",
    "check_eigen_characterization",
    "limit_recover_clopen",
    "limit_recover_vertex",
    "reconstruct_function",
    "roundtrip_measure",
]


def check_invertible(z: complex) -> complex:
    z = complex(z)
    if z * z == 0 or z * z == 1:
        raise ForbiddenParameterError(f"boundary values are undefined for z**2 = {z * z}")
    return z


def beta(z: complex, f: VertexFunction) -> EdgeCoefficients:
    """Boundary-value coefficients of ``f`` on every edge pointing away from ``o``."""
    z = check_invertible(z)
    tree = f.tree
    check_power_range(z, tree.D)
    pw = power_table(z, 0, tree.D)
    par = tree.parent[1:]
    vals = np.empty(tree.n, dtype=np.complex128)
    vals[0] = np.nan
    vals[1:] = (z * f.values[1:] - f.values[par]) / ((z * z - 1) * pw[tree.depth[par]])
    return EdgeCoefficients(tree, vals)


def boundary_measure(z: complex, f: VertexFunction, check: bool = True, tol: float = 1e-10) -> BoundaryMeasure:
    """The measure whose Poisson transform is ``f`` (``f`` must be an eigenfunction)."""
    return beta(z, f).to_measure(check=check, tol=tol)


@dataclass
class EigenReport:
    """Outcome of the eigenfunction test through boundary values.

    ``compat_violation`` is the largest flow-law defect over edges ending at
    interior vertices, ``root_condition_gap`` is ``|f(o) - sum of root coefficients|``;
    ``scale`` is ``max |f|`` for relative judgements.
    """

    compat_violation: float
    root_condition_gap: float
    scale: float
    coefficients: EdgeCoefficients = field(repr=False)

    def ok(self, tol: float = 1e-10) -> bool:
        bound = tol * max(1.0, self.scale)
        return self.compat_violation <= bound and self.root_condition_gap <= bound


def check_eigen_characterization(z: complex, f: VertexFunction) -> EigenReport:
    coeffs = beta(z, f)
    return EigenReport(
        compat_violation=coeffs.max_violation(),
        root_condition_gap=float(abs(f.values[0] - coeffs.root_sum())),
        scale=f.max_abs(),
        coefficients=coeffs,
    )


def roundtrip_measure(z: complex, mu: BoundaryMeasure) -> float:
    """``max_e |beta(z, P_z mu)(e) - flow(mu)(e)|`` over edges pointing away from ``o``."""
    check_invertible(z)
    got = beta(z, poisson_transform(z, mu)).values[1:]
    want = flow_away(mu).values[1:]
    return float(np.abs(got - want).max(initial=0.0))


def reconstruct_function(z: complex, coeffs: EdgeCoefficients, f_o: complex) -> VertexFunction:
    """Solve the boundary-value equation forward from ``f(o) = f_o``.

    ``f(v) = (f(u) + (z**2 - 1) z**depth(u) c(u, v)) / z`` along every edge.
    """
    z = check_invertible(z)
    tree = coeffs.tree
    check_power_range(z, tree.D)
    pw = power_table(z, 0, tree.D)
    c = np.asarray(coeffs.values, dtype=np.complex128)
    f = np.empty(tree.n, dtype=np.complex128)
    f[0] = f_o
    for n in range(1, tree.D + 1):
        level = tree.levels[n]
        par = tree.parent[level]
        f[level] = (f[par] + (z * z - 1) * pw[n - 1] * c[level]) / z
    return VertexFunction(tree, f)


def _check_chain(tree: Tree, chain: Sequence[int]) -> list[int]:
    chain = [int(v) for v in chain]
    if not chain:
        raise DomainError("empty chain")
    for a, b in zip(chain, chain[1:]):
        if b == 0 or tree.parent[b] != a:
            raise DomainError(f"chain step {a} -> {b} does not point away from o")
    return chain


def chain_formula_check(
    z: complex, mu: BoundaryMeasure, chain: Sequence[int], f: VertexFunction | None = None
) -> float:
    """Residual of the normalised propagation identity along ``chain``.

    For ``x_0, ..., x_k`` pointing away from ``o`` with ``m = depth(x_0)``:

        f(x_k)/z**(m+k) = f(x_0)/z**(m+2k) + (z**2-1)/z**2 * sum_{j=1..k} z**(2(j-k)) mu(x_j)

    where ``f = P_z(mu)`` unless given.
    """
    z = complex(z)
    if z in (0, 1, -1):
        raise ForbiddenParameterError(f"chain identity needs z not in {{-1, 0, 1}}, got {z}")
    tree = mu.tree
    chain = _check_chain(tree, chain)
    if f is None:
        f = poisson_transform(z, mu)
    m, k = int(tree.depth[chain[0]]), len(chain) - 1
    lhs = f.values[chain[-1]] * zpow(z, -(m + k))
    tail = sum(zpow(z, 2 * (j - k)) * complex(mu.cylinder[chain[j]]) for j in range(1, k + 1))
    rhs = f.values[chain[0]] * zpow(z, -(m + 2 * k)) + (z * z - 1) / (z * z) * tail
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------- #
# analytic recovery on regular trees
# ---------------------------------------------------------------------- #


@dataclass
class LimitTable:
    """Estimates ``c * z**-n * (sum of f over a level set)``, one per step.

    ``steps[i]`` is ``k`` (vertex recovery) or ``n`` (clopen recovery);
    ``normalized[i]`` is the bare normalised sum and ``estimates = constant * normalized``.
    In exact mode the arrays hold Fractions and so do errors and ratios.
    """

    steps: np.ndarray
    normalized: np.ndarray
    constant: complex
    estimates: np.ndarray

    @property
    def exact(self) -> bool:
        return self.estimates.dtype == object

    def errors(self, truth: complex) -> np.ndarray:
        if self.exact:
            return np.array([abs(e - truth) for e in self.estimates], dtype=object)
        return np.abs(self.estimates - truth)

    def error_ratios(self, truth: complex) -> np.ndarray:
        """``err[i] / err[i-1]``; NaN in the first slot and after a zero error."""
        err = self.errors(truth)
        if self.exact:
            return np.array(
                [np.nan] + [b / a if a else np.nan for a, b in zip(err[:-1], err[1:])], dtype=object
            )
        out = np.full(err.size, np.nan)
        prev = err[:-1]
        out[1:] = np.divide(err[1:], prev, out=np.full(prev.size, np.nan), where=prev > 0)
        return out


def _regular_regime(tree: Tree, z: complex) -> int:
    q = tree.regular_branching()
    if q is None:
        raise NonRegularTreeError("limit recovery is only available on regular trees")
    z = check_invertible(z)
    if not q < abs(z) ** 2:
        raise RegimeError(f"limit recovery needs q < |z|**2, got q={q}, |z|**2={abs(z) ** 2:.6g}")
    return q


def _arith(z, f: VertexFunction):
    """Parameter, power function and dtype for exact or floating evaluation."""
    zq = exact_parameter(z) if f.exact else None
    if zq is None:
        z = complex(z)
        return z, lambda k: zpow(z, k), np.complex128
    return zq, lambda k: zq**k, object


def recovery_constant(z: complex, q: int) -> complex:
    """``(z**2 - q) / (z**2 - 1)``, the factor turning sphere sums into cylinder masses."""
    return (z * z - q) / (z * z - 1)


def limit_recover_vertex(z: complex, f: VertexFunction, x: int, k_max: int) -> LimitTable:
    """Estimates ``m_k`` of ``mu(x)`` from sphere sums of ``f = P_z(mu)``, ``k = 0..k_max``.

    ``m_k = (z**2-q)/(z**2-1) * z**-(m+k) * sum_{y in S_k(x)} f(y)`` with ``m = depth(x)``.
    The error shrinks by the factor ``q/z**2`` per step.  Exact ``f`` with a
    rational ``z`` gives Fraction estimates.
    """
    tree = f.tree
    q = _regular_regime(tree, z)
    z, power, dtype = _arith(z, f)
    if x == 0:
        raise DomainError("vertex recovery needs x != o; use limit_recover_clopen for the whole boundary")
    m = int(tree.depth[x])
    if k_max < 0 or m + k_max > tree.D:
        raise DepthError(f"depth({x}) + k_max = {m + k_max} exceeds D = {tree.D}")
    check_power_range(complex(z), tree.D)
    normalized = np.empty(k_max + 1, dtype=dtype)
    front = np.array([x], dtype=np.int64)
    for k in range(k_max + 1):
        if k:
            front = np.concatenate([tree.children[int(u)] for u in front])
        normalized[k] = f.values[front].sum() * power(-(m + k))
    c = recovery_constant(z, q)
    return LimitTable(np.arange(k_max + 1), normalized, c, c * normalized)


def limit_recover_clopen(
    z: complex, f: VertexFunction, U: ClopenSet, n_max: int, constant: str = "standard"
) -> LimitTable:
    """Estimates of ``mu(U)`` from level sums ``z**-n * sum_{x in X_n(U)} f(x)``, ``n = 0..n_max``.

    ``X_n(U)`` is the set of depth-``n`` vertices on rays from ``o`` into ``U``.
    ``constant="standard"`` uses ``(z**2-q)/(z**2-1)``, which is what makes the
    estimates converge to ``mu(U)``; ``"reciprocal"`` uses its inverse
    ``(z**2-1)/(z**2-q)`` for comparison.
    """
    tree = f.tree
    q = _regular_regime(tree, z)
    z, power, dtype = _arith(z, f)
    if not 0 <= n_max <= tree.D:
        raise DepthError(f"n_max = {n_max} outside 0..{tree.D}")
    check_power_range(complex(z), tree.D)
    normalized = np.array(
        [f.values[U.level_set(n)].sum() * power(-n) for n in range(n_max + 1)], dtype=dtype
    )
    c = recovery_constant(z, q)
    if constant == "reciprocal":
        c = 1 / c
    elif constant != "standard":
        raise ValueError(f"unknown constant {constant!r}")
    return LimitTable(np.arange(n_max + 1), normalized, c, c * normalized)
