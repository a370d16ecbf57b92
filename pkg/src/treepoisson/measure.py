"""Finitely additive boundary measures on a truncated tree.

A measure is stored by the masses of the depth-``D`` cylinders; every other
cylinder mass is the sum of the leaf masses below it, so the additivity and
edge-compatibility laws hold by construction.  Masses are complex doubles, or
Python objects (e.g. :class:`fractions.Fraction`) when exact arithmetic is
wanted; the object path is slower but lets the measure laws be checked with
equality instead of tolerances.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DepthError, DomainError, MissingLeafError, NonRegularTreeError, NotAntichainError
from .rng import SplitMix64
from .tree import Tree


def _as_mass_array(values: Sequence) -> np.ndarray:
    vals = list(values)
    exact = any(
        isinstance(v, numbers.Rational) and not isinstance(v, (int, np.integer)) for v in vals
    )
    if exact:
        return np.array([v if isinstance(v, Fraction) else Fraction(v) for v in vals], dtype=object)
    return np.asarray(vals, dtype=np.complex128)


def _accumulate(tree: Tree, leaf_masses: np.ndarray) -> np.ndarray:
    """Cylinder masses of every vertex from the depth-``D`` masses, bottom-up."""
    if leaf_masses.dtype == object:
        cyl = np.array([Fraction(0)] * tree.n, dtype=object)
    else:
        cyl = np.zeros(tree.n, dtype=leaf_masses.dtype)
    cyl[tree.leaves] = leaf_masses
    for k in range(tree.D, 0, -1):
        level = tree.levels[k]
        np.add.at(cyl, tree.parent[level], cyl[level])
    return cyl


class BoundaryMeasure:
    """Finitely additive measure given by its depth-``D`` cylinder masses.

    ``cylinder[v]`` is the mass of the cylinder of ends through ``v``;
    ``cylinder[0]`` is the total mass.
    """

    def __init__(self, tree: Tree, leaf_masses: np.ndarray):
        if len(leaf_masses) != tree.leaves.size:
            raise MissingLeafError(
                f"expected {tree.leaves.size} leaf masses, got {len(leaf_masses)}"
            )
        self.tree = tree
        self.leaf_masses = leaf_masses
        self.cylinder = _accumulate(tree, leaf_masses)
        self.leaf_masses.setflags(write=False)
        self.cylinder.setflags(write=False)

    @property
    def exact(self) -> bool:
        return self.cylinder.dtype == object

    @property
    def total(self):
        return self.cylinder[0]

    def __getitem__(self, v: int):
        return self.cylinder[v]

    def __add__(self, other: "BoundaryMeasure") -> "BoundaryMeasure":
        _same_tree(self.tree, other.tree)
        return BoundaryMeasure(self.tree, self.leaf_masses + other.leaf_masses)

    def __rmul__(self, scalar) -> "BoundaryMeasure":
        return BoundaryMeasure(self.tree, scalar * self.leaf_masses)

    def __repr__(self) -> str:
        return f"BoundaryMeasure({self.tree!r}, total={self.total!r})"


def _same_tree(a: Tree, b: Tree) -> None:
    if a is not b and not a.same_structure(b):
        raise DomainError("objects live on different trees")


def from_leaf_masses(tree: Tree, masses: Mapping[int, object] | Sequence) -> BoundaryMeasure:
    """Measure with the given depth-``D`` cylinder masses.

    ``masses`` is either a mapping ``leaf id -> mass`` covering every leaf, or
    a sequence aligned with ``tree.leaves``.
    """
    if isinstance(masses, Mapping):
        extra = set(masses) - set(int(v) for v in tree.leaves)
        if extra:
            raise DepthError(f"vertices {sorted(extra)[:5]} are not at depth {tree.D}")
        missing = [int(v) for v in tree.leaves if int(v) not in masses]
        if missing:
            raise MissingLeafError(f"no mass for leaves {missing[:5]}")
        values = [masses[int(v)] for v in tree.leaves]
    else:
        values = list(masses)
    return BoundaryMeasure(tree, _as_mass_array(values))


def zero(tree: Tree) -> BoundaryMeasure:
    return BoundaryMeasure(tree, np.zeros(tree.leaves.size, dtype=np.complex128))


def dirac(tree: Tree, leaf: int, exact: bool = False) -> BoundaryMeasure:
    """Point mass at (any end in the cylinder of) ``leaf``."""
    if not 0 <= leaf < tree.n or tree.depth[leaf] != tree.D:
        raise DepthError(f"vertex {leaf} is not at the truncation depth {tree.D}")
    hit = tree.leaves == leaf
    if exact:
        return BoundaryMeasure(tree, np.array([Fraction(int(h)) for h in hit], dtype=object))
    return BoundaryMeasure(tree, hit.astype(np.complex128))


def rotation_invariant(tree: Tree, center: int = 0, exact: bool = False) -> BoundaryMeasure:
    """Rotation-invariant probability measure around ``center`` on a regular tree.

    Seen from ``center`` each of its ``q+1`` edges carries mass ``1/(q+1)``,
    and mass splits evenly over the ``q`` forward edges at every later vertex,
    so an edge pointing away from ``center`` carries ``q**-d(center, start)/(q+1)``.
    """
    q = tree.regular_branching()
    if q is None:
        raise NonRegularTreeError("rotation-invariant measures need a regular tree")
    one = Fraction(1) if exact else 1.0
    masses = []
    for leaf in tree.leaves:
        leaf = int(leaf)
        if leaf == center:
            # edge (parent, leaf) points toward the center
            masses.append(one * q / (q + 1))
        else:
            d = tree.distance(center, int(tree.parent[leaf]))
            masses.append(one / (q + 1) / q**d)
    return from_leaf_masses(tree, masses)


def random_measure(tree: Tree, seed: int) -> BoundaryMeasure:
    """Leaf masses i.i.d. uniform on the complex unit square, drawn in leaf id order."""
    gen = SplitMix64(seed)
    return from_leaf_masses(tree, [gen.complex_unit_square() for _ in tree.leaves])


# ---------------------------------------------------------------------- #
# edge flows
# ---------------------------------------------------------------------- #


def edge_flow(mu: BoundaryMeasure, edge: tuple[int, int]):
    """Mass of the ends reachable through the directed edge ``(a, b)``."""
    a, b = int(edge[0]), int(edge[1])
    tree = mu.tree
    if b != 0 and tree.parent[b] == a:
        return mu.cylinder[b]
    if a != 0 and tree.parent[a] == b:
        return mu.total - mu.cylinder[a]
    raise DomainError(f"({a}, {b}) is not an edge")


@dataclass
class EdgeCoefficients:
    """Complex value per edge pointing away from the base point.

    ``values[v]`` belongs to the edge ``(parent(v), v)``; ``values[0]`` is unused.
    """

    tree: Tree
    values: np.ndarray = field(repr=False)

    def __getitem__(self, v: int) -> complex:
        if v == 0:
            raise DomainError("the base point is not the end of an edge")
        return self.values[v]

    def root_sum(self):
        return self.values[self.tree.children[0]].sum()

    def compatibility_violations(self) -> np.ndarray:
        """``|c(e) - sum of c over the edges continuing e|`` for edges ending at interior vertices.

        Indexed like ``values``; zero where the law does not apply.
        """
        tree = self.tree
        out = np.zeros(tree.n)
        child_sum = np.zeros(tree.n, dtype=self.values.dtype)
        np.add.at(child_sum, tree.parent[1:], self.values[1:])
        inner = np.concatenate([tree.levels[k] for k in range(1, tree.D)] or [np.empty(0, np.int64)])
        out[inner] = np.abs(self.values[inner] - child_sum[inner])
        return out

    def max_violation(self) -> float:
        return float(self.compatibility_violations().max(initial=0.0))

    def to_measure(self, check: bool = True, tol: float = 1e-10) -> BoundaryMeasure:
        """Measure whose edge flow is these coefficients.

        The leaf masses are read off the edges into depth-``D`` vertices; with
        ``check`` the remaining coefficients must satisfy the flow law.
        """
        if check:
            scale = max(1.0, float(np.abs(self.values[1:]).max(initial=0.0)))
            if self.max_violation() > tol * scale:
                raise DomainError("edge coefficients violate the flow compatibility law")
        return BoundaryMeasure(self.tree, np.array(self.values[self.tree.leaves]))


def flow_away(mu: BoundaryMeasure) -> EdgeCoefficients:
    """Edge flow of ``mu`` restricted to edges pointing away from the base point."""
    vals = np.array(mu.cylinder, dtype=np.complex128)
    vals[0] = np.nan
    return EdgeCoefficients(mu.tree, vals)


# ---------------------------------------------------------------------- #
# clopen sets and cylinder functions
# ---------------------------------------------------------------------- #


class ClopenSet:
    """Finite union of cylinders, kept as its canonical antichain.

    Complete sibling families are merged into their parent until none is left,
    so two antichains describe the same set iff their canonical forms agree.
    """

    def __init__(self, tree: Tree, vertices: Iterable[int]):
        verts = sorted({int(v) for v in vertices})
        for v in verts:
            if not 0 <= v < tree.n:
                raise DomainError(f"vertex {v} not in tree")
        vset = set(verts)
        for v in verts:
            u = v
            while u != 0:
                u = int(tree.parent[u])
                if u in vset:
                    raise NotAntichainError(f"{u} is an ancestor of {v}")
        self.tree = tree
        self.antichain = tuple(sorted(_canonicalize(tree, vset)))

    @classmethod
    def whole(cls, tree: Tree) -> "ClopenSet":
        return cls(tree, [0])

    @classmethod
    def empty(cls, tree: Tree) -> "ClopenSet":
        return cls(tree, [])

    @classmethod
    def from_leaves(cls, tree: Tree, leaves: Iterable[int]) -> "ClopenSet":
        leaves = set(int(v) for v in leaves)
        if any(tree.depth[v] != tree.D for v in leaves):
            raise DepthError("from_leaves needs depth-D vertices")
        return cls(tree, leaves)

    def leaves(self) -> np.ndarray:
        """Depth-``D`` vertices whose cylinders make up the set."""
        if not self.antichain:
            return np.empty(0, dtype=np.int64)
        return np.sort(
            np.concatenate([self.tree.descendants_at(v, self.tree.D) for v in self.antichain])
        )

    def level_set(self, n: int) -> np.ndarray:
        """Vertices at depth ``n`` lying on a ray from ``o`` into the set."""
        tree = self.tree
        out = set()
        for v in self.antichain:
            if n <= tree.depth[v]:
                out.add(tree.ancestor(v, n))
            else:
                out.update(int(u) for u in tree.descendants_at(v, n))
        return np.array(sorted(out), dtype=np.int64)

    def isdisjoint(self, other: "ClopenSet") -> bool:
        return not set(self.leaves().tolist()) & set(other.leaves().tolist())

    def __or__(self, other: "ClopenSet") -> "ClopenSet":
        _same_tree(self.tree, other.tree)
        return ClopenSet.from_leaves(self.tree, set(self.leaves().tolist()) | set(other.leaves().tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClopenSet):
            return NotImplemented
        return self.tree.same_structure(other.tree) and self.antichain == other.antichain

    def __hash__(self) -> int:
        return hash(self.antichain)

    def __repr__(self) -> str:
        return f"ClopenSet({list(self.antichain)})"


def _canonicalize(tree: Tree, vset: set[int]) -> set[int]:
    by_depth: dict[int, set[int]] = {}
    for v in vset:
        by_depth.setdefault(int(tree.depth[v]), set()).add(v)
    for k in range(tree.D, 0, -1):
        here = by_depth.get(k, set())
        for w in {int(tree.parent[v]) for v in here}:
            kids = set(int(c) for c in tree.children[w])
            if kids <= here:
                here -= kids
                by_depth.setdefault(k - 1, set()).add(w)
    return set().union(*by_depth.values()) if by_depth else set()


def evaluate_clopen(mu: BoundaryMeasure, U: ClopenSet):
    """``mu(U)`` as the sum over the maximal cylinders of ``U``."""
    _same_tree(mu.tree, U.tree)
    if not U.antichain:
        return mu.cylinder.dtype.type(0) if mu.cylinder.dtype != object else Fraction(0)
    return mu.cylinder[list(U.antichain)].sum()


def evaluate_clopen_from(mu: BoundaryMeasure, U: ClopenSet, base: int):
    """``mu(U)`` rebuilt from edge flows seen from another base point.

    Decomposes ``U`` into the maximal edges pointing away from ``base`` whose
    forward ends lie in ``U`` and sums the edge flows over them.  Equal to
    :func:`evaluate_clopen` for every ``base`` when the flow laws hold.
    """
    tree = mu.tree
    _same_tree(tree, U.tree)
    span = tree.leaf_span
    L = tree.leaves.size
    inside = np.zeros(L, dtype=bool)
    inside[span[U.leaves(), 0]] = True

    def forward(a: int, b: int) -> np.ndarray:
        if b != 0 and tree.parent[b] == a:
            return inside[span[b, 0]:span[b, 1]]
        lo, hi = span[a]
        return np.concatenate([inside[:lo], inside[hi:]])

    maximal: list[tuple[int, int]] = []
    if tree.depth[base] == tree.D and inside[span[base, 0]]:
        # forward edges of a depth-D base are cut off; by the flow law they
        # carry together what enters base from its parent
        maximal.append((int(tree.parent[base]), base))
    stack = [(base, nb) for nb in tree.neighbors(base)]
    while stack:
        a, b = stack.pop()
        part = forward(a, b)
        if part.all():
            maximal.append((a, b))
        elif part.any():
            stack.extend((b, nb) for nb in tree.neighbors(b) if nb != a)
    if not maximal:
        return Fraction(0) if mu.exact else 0j
    return sum((edge_flow(mu, e) for e in maximal[1:]), edge_flow(mu, maximal[0]))


class CylinderFunction:
    """Locally constant boundary function, constant on the cylinders of one level.

    ``values`` is aligned with ``tree.levels[level]``.
    """

    def __init__(self, tree: Tree, level: int, values: Sequence):
        if not 0 <= level <= tree.D:
            raise DepthError(f"level {level} outside 0..{tree.D}")
        values = np.asarray(values)
        if values.shape != tree.levels[level].shape:
            raise DomainError(
                f"need {tree.levels[level].size} values at level {level}, got {values.shape}"
            )
        self.tree = tree
        self.level = level
        self.values = values.astype(np.complex128) if values.dtype != object else values

    @classmethod
    def from_mapping(cls, tree: Tree, level: int, mapping: Mapping[int, complex]) -> "CylinderFunction":
        return cls(tree, level, [mapping[int(v)] for v in tree.levels[level]])

    @classmethod
    def constant(cls, tree: Tree, c: complex = 1.0, level: int = 0) -> "CylinderFunction":
        return cls(tree, level, np.full(tree.levels[level].size, c, dtype=np.complex128))

    @classmethod
    def indicator(cls, tree: Tree, v: int, level: int | None = None) -> "CylinderFunction":
        """Indicator of the cylinder through ``v``, by default at level ``depth(v)``."""
        level = int(tree.depth[v]) if level is None else level
        if level < tree.depth[v]:
            raise DepthError("indicator level must not be shallower than the vertex")
        anc = tree.ancestors_at(tree.levels[level], int(tree.depth[v]))
        return cls(tree, level, (anc == v).astype(np.complex128))

    def refine(self, level: int) -> "CylinderFunction":
        """Same function written at a deeper level."""
        if level < self.level:
            raise DepthError("can only refine to a deeper level")
        anc = self.tree.ancestors_at(self.tree.levels[level], self.level)
        pos = np.searchsorted(self.tree.levels[self.level], anc)
        return CylinderFunction(self.tree, level, self.values[pos])

    def at(self, vertices: np.ndarray) -> np.ndarray:
        """Values at vertices of depth >= ``level`` (constant along each cylinder)."""
        anc = self.tree.ancestors_at(np.asarray(vertices), self.level)
        return self.values[np.searchsorted(self.tree.levels[self.level], anc)]

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))

    def _aligned(self, other: "CylinderFunction") -> tuple[np.ndarray, np.ndarray, int]:
        _same_tree(self.tree, other.tree)
        lvl = max(self.level, other.level)
        return self.refine(lvl).values, other.refine(lvl).values, lvl

    def __add__(self, other: "CylinderFunction") -> "CylinderFunction":
        a, b, lvl = self._aligned(other)
        return CylinderFunction(self.tree, lvl, a + b)

    def __sub__(self, other: "CylinderFunction") -> "CylinderFunction":
        a, b, lvl = self._aligned(other)
        return CylinderFunction(self.tree, lvl, a - b)

    def __rmul__(self, scalar: complex) -> "CylinderFunction":
        return CylinderFunction(self.tree, self.level, scalar * self.values)


def pair(mu: BoundaryMeasure, p: CylinderFunction):
    """Integral of the cylinder function ``p`` against ``mu``."""
    _same_tree(mu.tree, p.tree)
    return (p.values * mu.cylinder[mu.tree.levels[p.level]]).sum()
