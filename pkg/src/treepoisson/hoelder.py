"""Boundary metrics, Hölder norms and growth envelopes.

The boundary metric from base point ``b`` is ``theta**d`` where ``d`` is the
distance from ``b`` to the last vertex shared by the two rays.  Cylinder
functions are Lipschitz for every ``theta``, and their Lipschitz constant is a
maximum over finitely many pairs, so it is computed exactly.

Growth envelopes fit ``|value(v)| <= scale * rate**depth(v)`` with the rate
``max_n (a_n / a_0)**(1/n)``, where ``a_n`` is the largest absolute value on
level ``n``.  The fitted envelope is always valid, never just plausible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .boundary import check_eigen_characterization, check_invertible
from .errors import DomainError, NotEigenfunctionError, RegimeWarning
from .measure import BoundaryMeasure, CylinderFunction, EdgeCoefficients
from .poisson import VertexFunction
from .tree import Tree


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    return theta


def boundary_distance(theta: float, leaf1: int, leaf2: int, tree: Tree, base: int = 0) -> float:
    """Distance between the cylinders of two depth-``D`` vertices, seen from ``base``.

    Identical leaves get 0; the true distances inside one cylinder are below
    ``theta**D`` and not resolved by the truncation.
    """
    theta = _check_theta(theta)
    for v in (leaf1, leaf2):
        if tree.depth[v] != tree.D:
            raise DomainError(f"vertex {v} is not at the truncation depth {tree.D}")
    if leaf1 == leaf2:
        return 0.0
    d = (tree.distance(base, leaf1) + tree.distance(base, leaf2) - tree.distance(leaf1, leaf2)) // 2
    return theta**d


def _meet_depths(anc_rows: np.ndarray, anc_all: np.ndarray) -> np.ndarray:
    agree = anc_rows[:, None, :] == anc_all[None, :, :]
    return np.cumprod(agree, axis=2).sum(axis=2) - 1


def lipschitz_seminorm(theta: float, p: CylinderFunction, chunk_cells: int = 4_000_000) -> float:
    """Smallest Lipschitz constant of ``p`` for the boundary metric from ``o``.

    Maximum of ``|p(u) - p(v)| / theta**depth(meet(u, v))`` over distinct
    level vertices ``u, v``; computed in row chunks to bound memory.
    """
    theta = _check_theta(theta)
    tree, level = p.tree, p.level
    verts = tree.levels[level]
    L = verts.size
    if L < 2:
        return 0.0
    A = tree.ancestor_matrix(verts)
    vals = p.values
    inv_pow = theta ** -np.arange(level + 1, dtype=np.float64)
    rows = max(1, chunk_cells // (L * (level + 1)))
    best = 0.0
    for start in range(0, L, rows):
        stop = min(L, start + rows)
        md = _meet_depths(A[start:stop], A)
        diff = np.abs(vals[start:stop, None] - vals[None, :])
        best = max(best, float((diff * inv_pow[md]).max()))
    return best


def hoelder_norm(theta: float, p: CylinderFunction) -> float:
    """Lipschitz seminorm plus sup norm."""
    return lipschitz_seminorm(theta, p) + p.sup_norm()


# ---------------------------------------------------------------------- #
# growth envelopes
# ---------------------------------------------------------------------- #


@dataclass(frozen=True)
class GrowthEnvelope:
    """``|value(v)| <= scale * rate**depth(v)`` on every vertex.

    For measures ``(scale, rate)`` is ``(C, K)``; for vertex functions ``(B, G)``.
    """

    scale: float
    rate: float
    kind: str
    level_maxima: np.ndarray = field(repr=False, compare=False)

    @property
    def C(self) -> float:
        return self.scale

    @property
    def K(self) -> float:
        return self.rate

    B = C
    G = K

    def bound(self, depth) -> np.ndarray:
        return _envelope(self.scale, self.rate, depth)

    def holds(self, tree: Tree, abs_values: np.ndarray) -> bool:
        """Full scan of the envelope inequality."""
        return bool(np.all(abs_values <= self.bound(tree.depth)))

    def running_rates(self) -> np.ndarray:
        """Rate fitted on levels ``0..n`` for each ``n`` (1.0 at ``n = 0``)."""
        s = _reference_scale(self.level_maxima)
        out = np.ones(self.level_maxima.size)
        r = 0.0
        for n in range(1, self.level_maxima.size):
            r = max(r, _nth_root_ceiling(self.level_maxima[n] / s, n))
            out[n] = r if r > 0 else 1.0
        return out


def _envelope(scale: float, rate: float, depth) -> np.ndarray:
    # single evaluation rule, shared by fitting and checking
    return scale * np.power(float(rate), np.asarray(depth, dtype=np.float64))


def level_maxima(tree: Tree, abs_values: np.ndarray) -> np.ndarray:
    return np.array([abs_values[lvl].max() for lvl in tree.levels])


def _nth_root_ceiling(a: float, n: int) -> float:
    """Smallest double ``r`` with ``r**n >= a``."""
    if a <= 0:
        return 0.0
    r = a ** (1.0 / n)
    while r**n < a:
        r = math.nextafter(r, math.inf)
    while r > 0 and math.nextafter(r, 0.0) ** n >= a:
        r = math.nextafter(r, 0.0)
    return r


def _reference_scale(maxima: np.ndarray) -> float:
    return float(maxima[0]) if maxima[0] > 0 else 1.0


def _fit(maxima: np.ndarray, kind: str) -> GrowthEnvelope:
    if not np.any(maxima > 0):
        return GrowthEnvelope(0.0, 1.0, kind, maxima)
    s = _reference_scale(maxima)
    rate = max((_nth_root_ceiling(maxima[n] / s, n) for n in range(1, maxima.size)), default=0.0)
    if rate == 0.0:
        rate = 1.0
    rate = float(rate)
    scale = s
    levels = np.arange(maxima.size)
    # rounding in scale * rate**n can undercut a maximum by an ulp
    while np.any(maxima > _envelope(scale, rate, levels)):
        scale = math.nextafter(scale, math.inf)
    return GrowthEnvelope(scale, rate, kind, maxima)


def measure_growth_envelope(mu: BoundaryMeasure) -> GrowthEnvelope:
    """``(C, K)`` with ``|mu(v)| <= C K**depth(v)`` for all vertices."""
    a = np.abs(np.asarray(mu.cylinder, dtype=np.complex128))
    return _fit(level_maxima(mu.tree, a), "measure")


def function_growth_envelope(f: VertexFunction) -> GrowthEnvelope:
    """``(B, G)`` with ``|f(x)| <= B G**depth(x)`` for all vertices."""
    return _fit(level_maxima(f.tree, np.abs(f.values)), "function")


# ---------------------------------------------------------------------- #
# extension of measures to Hölder functions
# ---------------------------------------------------------------------- #


class SectionMap:
    """A depth-``D`` descendant ``W(v)`` for every vertex ``v``."""

    def __init__(self, tree: Tree, targets: np.ndarray):
        targets = np.asarray(targets, dtype=np.int64)
        if targets.shape != (tree.n,):
            raise DomainError("a section map needs one target per vertex")
        if np.any(tree.depth[targets] != tree.D):
            raise DomainError("section targets must be at the truncation depth")
        for k in range(tree.D + 1):
            lvl = tree.levels[k]
            if np.any(tree.ancestors_at(targets[lvl], k) != lvl):
                raise DomainError("W(v) must lie below v")
        self.tree = tree
        self.targets = targets

    def __getitem__(self, v: int) -> int:
        return int(self.targets[v])

    @classmethod
    def first_child(cls, tree: Tree) -> "SectionMap":
        """Follow the smallest child id down to depth ``D``."""
        t = np.arange(tree.n)
        for _ in range(tree.D):
            shallow = tree.depth[t] < tree.D
            t[shallow] = [int(tree.children[int(u)][0]) for u in t[shallow]]
        return cls(tree, t)

    @classmethod
    def random(cls, tree: Tree, rng: np.random.Generator) -> "SectionMap":
        t = np.arange(tree.n)
        for _ in range(tree.D):
            shallow = np.flatnonzero(tree.depth[t] < tree.D)
            t[shallow] = [
                int(rng.choice(tree.children[int(u)])) for u in t[shallow]
            ]
        return cls(tree, t)


def mu_W_extension(
    mu: BoundaryMeasure, theta: float, W: SectionMap, p: CylinderFunction, n_max: int
) -> np.ndarray:
    """Partial sums ``sum_{depth(v)=n} mu(v) p(W(v))`` for ``n = 0..n_max``.

    Converges for ``theta < 1/(K q_max)`` with ``K`` the fitted measure growth
    rate; outside that range a :class:`RegimeWarning` is issued and the sums
    are still returned.  For cylinder functions the sequence is constant from
    ``n = p.level`` on.
    """
    theta = _check_theta(theta)
    tree = mu.tree
    if not 0 <= n_max <= tree.D:
        raise DomainError(f"n_max = {n_max} outside 0..{tree.D}")
    env = measure_growth_envelope(mu)
    if tree.q_max > 0 and theta * env.rate * tree.q_max >= 1:
        warnings.warn(
            f"theta = {theta} >= 1/(K q_max) = {1 / (env.rate * tree.q_max):.6g}; "
            "convergence of the partial sums is not guaranteed",
            RegimeWarning,
            stacklevel=2,
        )
    cyl = np.asarray(mu.cylinder, dtype=np.complex128)
    out = np.empty(n_max + 1, dtype=np.complex128)
    for n in range(n_max + 1):
        lvl = tree.levels[n]
        out[n] = (cyl[lvl] * p.at(W.targets[lvl])).sum()
    return out


# ---------------------------------------------------------------------- #
# growth of eigenfunctions vs. growth of their boundary values
# ---------------------------------------------------------------------- #


@dataclass
class GrowthReport:
    """Finite-depth diagnostics linking eigenfunction growth and boundary-value growth.

    ``implied_measure_bound[n]`` bounds ``max |mu(v)|`` on level ``n`` using
    only the function envelope, ``implied_function_bound[n]`` bounds
    ``max |f(x)|`` using only the measure envelope.  ``rate_from_function`` and
    ``rate_from_measure`` are the exponential rates of those bounds.
    """

    function_envelope: GrowthEnvelope
    measure_envelope: GrowthEnvelope
    implied_measure_bound: np.ndarray = field(repr=False)
    implied_function_bound: np.ndarray = field(repr=False)
    rate_from_function: float
    rate_from_measure: float
    measure_within_bound: bool
    function_within_bound: bool

    @property
    def finite(self) -> bool:
        vals = (
            self.function_envelope.scale,
            self.function_envelope.rate,
            self.measure_envelope.scale,
            self.measure_envelope.rate,
        )
        return all(math.isfinite(v) for v in vals)

    @property
    def consistent(self) -> bool:
        return self.finite and self.measure_within_bound and self.function_within_bound


def mod_growth_crosscheck(z: complex, f: VertexFunction, tol: float = 1e-8) -> GrowthReport:
    """Fit growth envelopes on both sides of the boundary-value map and cross-bound them.

    From ``c(u,v) = (z f(v) - f(u)) / ((z**2-1) z**(n-1))`` at depth ``n``:
    ``|mu(v)| <= B (|z| G**n + G**(n-1)) / (|z**2-1| |z|**(n-1))``.
    From the propagation identity started at ``o``:
    ``|f(x)| <= C |z|**-n + |z**2-1| * sum_{j=1..n} |z|**(2j-n-2) C K**j``.
    Raises :class:`NotEigenfunctionError` if ``f`` fails the eigenfunction test.
    """
    z = check_invertible(z)
    report = check_eigen_characterization(z, f)
    if not report.ok(tol):
        raise NotEigenfunctionError(
            f"not a chi(z)-eigenfunction: flow defect {report.compat_violation:.3g}, "
            f"root gap {report.root_condition_gap:.3g}"
        )
    tree = f.tree
    coeffs: EdgeCoefficients = report.coefficients
    mu = coeffs.to_measure(check=False)
    fenv = function_growth_envelope(f)
    menv = measure_growth_envelope(mu)

    az, a21 = abs(z), abs(z * z - 1)
    B, G, C, K = fenv.scale, fenv.rate, menv.scale, menv.rate
    n = np.arange(tree.D + 1, dtype=np.float64)
    implied_mu = np.empty(tree.D + 1)
    implied_mu[0] = B
    implied_mu[1:] = B * (az * G ** n[1:] + G ** (n[1:] - 1)) / (a21 * az ** (n[1:] - 1))
    implied_f = np.empty(tree.D + 1)
    for k in range(tree.D + 1):
        j = np.arange(1, k + 1, dtype=np.float64)
        implied_f[k] = C * az**-k + a21 * float(np.sum(az ** (2 * j - k - 2) * C * K**j))

    slack = 1 + 1e-9
    return GrowthReport(
        function_envelope=fenv,
        measure_envelope=menv,
        implied_measure_bound=implied_mu,
        implied_function_bound=implied_f,
        rate_from_function=G / az,
        rate_from_measure=max(az * K, 1 / az),
        measure_within_bound=bool(np.all(menv.level_maxima <= implied_mu * slack)),
        function_within_bound=bool(np.all(fenv.level_maxima <= implied_f * slack)),
    )
