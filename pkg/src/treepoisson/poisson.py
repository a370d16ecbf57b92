"""Laplacian, potential and Poisson transform.

The transform evaluates ``f(x) = sum_leaf z**<x, leaf> * mass(leaf)`` by
grouping leaves according to where their ray leaves the chain ``[o, x]``:
if ``x_0 = o, ..., x_n = x`` then all leaves branching off at ``x_j`` share
the bracket ``2j - n``, so

    f(x) = sum_j z**(2j - n) * (mu(x_j) - mu(x_{j+1})),   mu(x_{n+1}) := 0.

That is exact and costs ``O(depth)`` per vertex.  :func:`poisson_transform_direct`
keeps the literal per-leaf sum as an independent reference.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, PowerOverflowError, ZeroParameterError
from .measure import BoundaryMeasure
from .tree import Tree

#: Largest admissible ``D * |log|z||`` before powers of ``z`` leave double range.
LOG_POWER_LIMIT = 600.0


def zpow(z: complex, k: int) -> complex:
    """``z**k`` for integer ``k`` by binary exponentiation."""
    if k < 0:
        z, k = 1 / z, -k
    result = 1 + 0j
    base = complex(z)
    while k:
        if k & 1:
            result *= base
        base *= base
        k >>= 1
    return result


def exact_parameter(z) -> Fraction | None:
    """``z`` as a Fraction when it is rational (int or Fraction), else None."""
    if isinstance(z, numbers.Rational) and not isinstance(z, bool):
        return Fraction(z)
    return None


def _exact_power_table(z: Fraction, kmin: int, kmax: int) -> np.ndarray:
    return np.array([z**k for k in range(kmin, kmax + 1)], dtype=object)


def power_table(z: complex, kmin: int, kmax: int) -> np.ndarray:
    """``[z**kmin, ..., z**kmax]`` as a complex array."""
    return np.array([zpow(z, k) for k in range(kmin, kmax + 1)], dtype=np.complex128)


def check_nonzero(z: complex) -> complex:
    z = complex(z)
    if z == 0:
        raise ZeroParameterError("the spectral parameter must be nonzero")
    return z


def check_power_range(z: complex, D: int) -> None:
    if D * abs(math.log(abs(z))) > LOG_POWER_LIMIT:
        raise PowerOverflowError(
            f"|z|**D out of double range: D*|log|z|| = {D * abs(math.log(abs(z))):.1f} > {LOG_POWER_LIMIT}"
        )


@dataclass
class VertexFunction:
    """Complex function on the vertices of a truncated tree.

    ``defined`` marks where the values are meaningful; partial results such
    as the Laplacian leave the depth-``D`` vertices undefined (NaN).  An
    object array of Fractions is kept as is (exact mode).
    """

    tree: Tree
    values: np.ndarray = field(repr=False)
    defined: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        self.values = values if values.dtype == object else values.astype(np.complex128)
        if self.values.shape != (self.tree.n,):
            raise DomainError(f"need {self.tree.n} values, got shape {self.values.shape}")
        if self.defined is None:
            self.defined = np.ones(self.tree.n, dtype=bool)

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def __getitem__(self, v: int) -> complex:
        return complex(self.values[v])

    def max_abs(self) -> float:
        return float(np.abs(self.values[self.defined]).max(initial=0.0))

    def __add__(self, other: "VertexFunction") -> "VertexFunction":
        return VertexFunction(self.tree, self.values + other.values, self.defined & other.defined)

    def __sub__(self, other: "VertexFunction") -> "VertexFunction":
        return VertexFunction(self.tree, self.values - other.values, self.defined & other.defined)

    def __rmul__(self, scalar: complex) -> "VertexFunction":
        return VertexFunction(self.tree, scalar * self.values, self.defined.copy())


def _interior_mask(tree: Tree) -> np.ndarray:
    return tree.depth < tree.D


def potential(tree: Tree, z: complex) -> VertexFunction:
    """``chi(z)(x) = (z + q_x/z) / (q_x + 1)``.

    Depth-``D`` vertices get the value from their truncated degree but are
    marked undefined: their true degree is not part of the truncation.
    """
    z = check_nonzero(z)
    q = (tree.n_children + (np.arange(tree.n) != 0) - 1).astype(np.float64)
    return VertexFunction(tree, (z + q / z) / (q + 1), _interior_mask(tree))


def laplacian(f: VertexFunction) -> VertexFunction:
    """Neighbour average, defined at vertices above the truncation depth."""
    tree = f.tree
    total = np.zeros(tree.n, dtype=np.complex128)
    np.add.at(total, tree.parent[1:], f.values[1:])
    total[1:] += f.values[tree.parent[1:]]
    deg = tree.n_children + (np.arange(tree.n) != 0)
    out = np.full(tree.n, np.nan + 0j)
    inner = _interior_mask(tree)
    out[inner] = total[inner] / deg[inner]
    return VertexFunction(tree, out, inner)


def eigen_residual(f: VertexFunction, z: complex) -> VertexFunction:
    """``(Delta - chi(z)) f`` at interior vertices."""
    lap = laplacian(f)
    chi = potential(f.tree, z)
    out = np.full(f.tree.n, np.nan + 0j)
    mask = lap.defined
    out[mask] = lap.values[mask] - chi.values[mask] * f.values[mask]
    return VertexFunction(f.tree, out, mask.copy())


def relative_eigen_residual(f: VertexFunction, z: complex) -> np.ndarray:
    """``|eigen_residual|`` divided by the largest ``|f|`` on the closed neighbourhood.

    Returns a real array over all vertices, NaN at depth ``D`` and 0 where
    ``f`` vanishes on the whole neighbourhood.
    """
    tree = f.tree
    res = eigen_residual(f, z)
    a = np.abs(f.values)
    local = a.copy()
    np.maximum.at(local, tree.parent[1:], a[1:])
    local[1:] = np.maximum(local[1:], a[tree.parent[1:]])
    out = np.full(tree.n, np.nan)
    m = res.defined
    r = np.abs(res.values[m])
    scale = local[m]
    out[m] = np.divide(r, scale, out=np.zeros_like(r), where=scale > 0)
    return out


def poisson_transform(z: complex, mu: BoundaryMeasure) -> VertexFunction:
    """``P_z(mu)``: the Poisson integral of ``mu`` at every vertex.

    With an exact measure and a rational ``z`` (int or Fraction) the result
    is computed in rational arithmetic.
    """
    zq = exact_parameter(z) if mu.exact else None
    z = check_nonzero(z)
    tree = mu.tree
    if zq is not None:
        return VertexFunction(tree, _exact_transform(zq, mu))
    check_power_range(z, tree.D)
    pw = power_table(z, -tree.D, tree.D)  # pw[k + D] = z**k
    cyl = np.asarray(mu.cylinder, dtype=np.complex128)
    out = np.empty(tree.n, dtype=np.complex128)
    out[0] = cyl[0]
    for n in range(1, tree.D + 1):
        level = tree.levels[n]
        anc = tree.ancestor_matrix(level)  # columns x_0 .. x_n
        m = cyl[anc]
        diff = np.empty_like(m)
        diff[:, :-1] = m[:, :-1] - m[:, 1:]
        diff[:, -1] = m[:, -1]
        weights = pw[np.arange(0, 2 * n + 1, 2) - n + tree.D]
        out[level] = (diff * weights).sum(axis=1)
    return VertexFunction(tree, out)


def _exact_transform(z: Fraction, mu: BoundaryMeasure) -> np.ndarray:
    """Rational evaluation of the path sum through its prefix form.

    ``S(x) = z**n f(x)`` satisfies ``S(x) = S(parent) + z**(2n-2) (z**2 - 1) mu(x)``
    at depth ``n``; in rational arithmetic this costs ``O(n)`` with no rounding.
    """
    tree = mu.tree
    cyl = mu.cylinder
    S = np.empty(tree.n, dtype=object)
    out = np.empty(tree.n, dtype=object)
    S[0] = out[0] = Fraction(cyl[0])
    for n in range(1, tree.D + 1):
        level = tree.levels[n]
        step = z ** (2 * n - 2) * (z * z - 1)
        S[level] = S[tree.parent[level]] + step * cyl[level]
        out[level] = S[level] / z**n
    return out


def poisson_transform_direct(z: complex, mu: BoundaryMeasure) -> VertexFunction:
    """Literal per-leaf sum ``sum_leaf z**<x, leaf> mass(leaf)``; ``O(n * L * D)``.

    Independent of :func:`poisson_transform`; meant for small trees and as
    a cross-check.  Leaf sums use numpy's pairwise summation.
    """
    z = check_nonzero(z)
    tree = mu.tree
    check_power_range(z, tree.D)
    pw = power_table(z, -tree.D, tree.D)
    leaves = tree.leaves
    A = tree.ancestor_matrix(leaves)
    masses = np.asarray(mu.leaf_masses, dtype=np.complex128)
    out = np.empty(tree.n, dtype=np.complex128)
    for x in range(tree.n):
        n = int(tree.depth[x])
        path = np.array(tree.path_from_root(x))
        agree = np.cumprod(A[:, : n + 1] == path, axis=1)
        meet_depth = agree.sum(axis=1) - 1
        bracket = 2 * meet_depth - n
        out[x] = (pw[bracket + tree.D] * masses).sum()
    return VertexFunction(tree, out)
