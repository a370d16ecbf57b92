"""Rooted bounded-degree trees truncated at a finite depth.

A :class:`Tree` is the depth-``D`` ball around the base point ``o`` (vertex 0)
of an infinite tree.  Vertices at depth ``D`` are not genuine leaves: each one
stands for the boundary cylinder of all ends whose ray from ``o`` passes
through it.  Every quantity computed elsewhere in the package only depends on
this ball, so nothing about the unseen extension has to be guessed.

Vertex ids satisfy ``parent[v] < v``, so a single forward pass over ids visits
parents before children.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DepthError, InteriorLeafError, MalformedTreeError

#: Default upper bound on the number of vertices a constructor will allocate.
MAX_VERTICES = 5_000_000


class Tree:
    """Immutable rooted tree with all leaves at the truncation depth.

    Parameters
    ----------
    parent : sequence of int
        ``parent[v]`` for every vertex; ``parent[0]`` must be ``-1``.
    max_vertices : int
        Capacity limit, see :data:`MAX_VERTICES`.

    Attributes
    ----------
    n : int
        Number of vertices.
    D : int
        Truncation depth (maximal depth).
    parent, depth : ndarray of int64
    children : tuple of ndarray
        Children of every vertex in increasing id order.
    levels : tuple of ndarray
        ``levels[k]`` holds the ids at depth ``k`` in increasing order.
    q_max : int
        Largest branching number ``deg(v) - 1`` over interior vertices.
    """

    def __init__(self, parent: Sequence[int], max_vertices: int = MAX_VERTICES):
        par = np.asarray(parent, dtype=np.int64)
        if par.ndim != 1 or par.size == 0:
            raise MalformedTreeError("parent array must be a non-empty 1-d sequence")
        n = int(par.size)
        if n > max_vertices:
            raise CapacityError(f"{n} vertices exceed the capacity limit {max_vertices}")
        if par[0] != -1:
            raise MalformedTreeError("vertex 0 is the base point and must not have a parent")
        ids = np.arange(n)
        if n > 1:
            rest = par[1:]
            if np.any(rest < 0):
                bad = int(ids[1:][rest < 0][0])
                raise MalformedTreeError(f"vertex {bad} has no parent")
            if np.any(rest >= ids[1:]):
                bad = int(ids[1:][rest >= ids[1:]][0])
                raise MalformedTreeError(
                    f"vertex {bad} has parent {int(par[bad])}; parents must precede children"
                )
        depth = np.zeros(n, dtype=np.int64)
        for v in range(1, n):
            depth[v] = depth[par[v]] + 1
        D = int(depth.max())

        order = np.argsort(par[1:], kind="stable") + 1
        counts = np.bincount(par[1:], minlength=n) if n > 1 else np.zeros(n, dtype=np.int64)
        splits = np.cumsum(counts)[:-1]
        children = tuple(np.split(order, splits))

        interior = depth < D
        childless = interior & (counts == 0)
        if np.any(childless):
            bad = int(ids[childless][0])
            raise InteriorLeafError(
                f"vertex {bad} at depth {int(depth[bad])} has no children but D = {D}"
            )

        self.n = n
        self.D = D
        self.parent = par
        self.depth = depth
        self.children = children
        self.n_children = counts.astype(np.int64)
        self.levels = tuple(ids[depth == k] for k in range(D + 1))
        branching = counts - (ids == 0)
        self.q_max = int(branching[interior].max()) if D > 0 else 0
        for arr in (self.parent, self.depth, self.n_children, *self.levels, *self.children):
            arr.setflags(write=False)

    # ------------------------------------------------------------------ #
    # basic structure
    # ------------------------------------------------------------------ #

    @property
    def root(self) -> int:
        return 0

    @property
    def leaves(self) -> np.ndarray:
        """Depth-``D`` vertices in increasing id order."""
        return self.levels[self.D]

    def degree(self, v: int) -> int:
        """Degree of ``v`` inside the truncation (1 for depth-``D`` vertices)."""
        return int(self.n_children[v]) + (1 if v != 0 else 0)

    def branching(self, v: int) -> int:
        """``q_v = deg(v) - 1``; only meaningful for interior vertices."""
        return self.degree(v) - 1

    def is_interior(self, v: int) -> bool:
        return bool(self.depth[v] < self.D)

    def neighbors(self, v: int) -> list[int]:
        out = [] if v == 0 else [int(self.parent[v])]
        out.extend(int(c) for c in self.children[v])
        return out

    def regular_branching(self) -> int | None:
        """Return ``q`` if the truncation is the ball of a ``(q+1)``-regular tree."""
        if self.D == 0:
            return None
        q = int(self.n_children[0]) - 1
        if q < 1:
            return None
        inner = np.concatenate(self.levels[1:self.D]) if self.D > 1 else np.empty(0, np.int64)
        if np.all(self.n_children[inner] == q):
            return q
        return None

    def edges(self) -> Iterable[tuple[int, int]]:
        """Edges pointing away from the base point, ordered by child id."""
        for v in range(1, self.n):
            yield int(self.parent[v]), v

    def _check(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.n:
            raise MalformedTreeError(f"vertex {v} not in tree of {self.n} vertices")
        return v

    def same_structure(self, other: "Tree") -> bool:
        return self.n == other.n and bool(np.array_equal(self.parent, other.parent))

    # ------------------------------------------------------------------ #
    # metric queries
    # ------------------------------------------------------------------ #

    def ancestor(self, v: int, k: int) -> int:
        """Ancestor of ``v`` at depth ``k`` (``v`` itself if ``k == depth(v)``)."""
        v = self._check(v)
        if not 0 <= k <= self.depth[v]:
            raise DepthError(f"no ancestor of {v} at depth {k}")
        while self.depth[v] > k:
            v = int(self.parent[v])
        return v

    def path_from_root(self, v: int) -> list[int]:
        """Vertices of the chain ``[o, v]``, starting at ``o``."""
        v = self._check(v)
        out = [v]
        while v != 0:
            v = int(self.parent[v])
            out.append(v)
        return out[::-1]

    def is_ancestor(self, a: int, v: int) -> bool:
        """True if ``a`` lies on ``[o, v]`` (``a == v`` included)."""
        a, v = self._check(a), self._check(v)
        if self.depth[a] > self.depth[v]:
            return False
        return self.ancestor(v, int(self.depth[a])) == a

    def meet(self, x: int, v: int) -> int:
        """Deepest common vertex of ``[o, x]`` and ``[o, v]``."""
        x, v = self._check(x), self._check(v)
        dx, dv = self.depth[x], self.depth[v]
        while dx > dv:
            x = int(self.parent[x])
            dx -= 1
        while dv > dx:
            v = int(self.parent[v])
            dv -= 1
        while x != v:
            x, v = int(self.parent[x]), int(self.parent[v])
        return x

    def distance(self, x: int, y: int) -> int:
        m = self.meet(x, y)
        return int(self.depth[x] + self.depth[y] - 2 * self.depth[m])

    def horocycle_bracket(self, x: int, leaf: int) -> int:
        """``<x, w>`` for any end ``w`` in the cylinder of the depth-``D`` vertex ``leaf``.

        With ``y`` the meet of ``x`` and ``leaf`` this is ``d(o,y) - d(x,y)``.
        """
        leaf = self._check(leaf)
        if self.depth[leaf] != self.D:
            raise DepthError(f"vertex {leaf} is not at the truncation depth {self.D}")
        y = self.meet(x, leaf)
        return int(2 * self.depth[y] - self.depth[x])

    def sphere(self, x: int, k: int) -> np.ndarray:
        """``S_k(x)``: vertices at distance ``k`` from ``x`` whose ray from ``o`` passes ``x``."""
        x = self._check(x)
        if k < 0 or self.depth[x] + k > self.D:
            raise DepthError(f"depth({x}) + {k} exceeds the truncation depth {self.D}")
        front = np.array([x], dtype=np.int64)
        for _ in range(k):
            front = np.concatenate([self.children[int(u)] for u in front])
        return np.sort(front)

    def descendants_at(self, x: int, level: int) -> np.ndarray:
        return self.sphere(x, level - int(self.depth[self._check(x)]))

    # ------------------------------------------------------------------ #
    # vectorised helpers
    # ------------------------------------------------------------------ #

    def ancestors_at(self, vs: np.ndarray, k: int) -> np.ndarray:
        """Vectorised :meth:`ancestor` for an array of vertices all of depth >= ``k``."""
        vs = np.asarray(vs, dtype=np.int64).copy()
        if vs.size and np.any(self.depth[vs] < k):
            raise DepthError(f"some vertices are shallower than depth {k}")
        while vs.size and np.any(self.depth[vs] > k):
            deep = self.depth[vs] > k
            vs[deep] = self.parent[vs[deep]]
        return vs

    def ancestor_matrix(self, vs: np.ndarray) -> np.ndarray:
        """Rows ``[o, ..., v]`` for vertices ``vs`` of one common depth ``d``.

        Returns an int array of shape ``(len(vs), d + 1)``.
        """
        vs = np.asarray(vs, dtype=np.int64)
        if vs.size == 0:
            return np.empty((0, 0), dtype=np.int64)
        d = int(self.depth[vs[0]])
        if np.any(self.depth[vs] != d):
            raise DepthError("ancestor_matrix needs vertices of equal depth")
        out = np.empty((vs.size, d + 1), dtype=np.int64)
        cur = vs.copy()
        for j in range(d, -1, -1):
            out[:, j] = cur
            cur = self.parent[cur]
        return out

    @cached_property
    def leaf_span(self) -> np.ndarray:
        """``(lo, hi)`` per vertex: its leaves are ``dfs_leaves[lo:hi]``."""
        span = np.zeros((self.n, 2), dtype=np.int64)
        pos = 0
        stack = [(0, False)]
        while stack:
            v, done = stack.pop()
            if done:
                span[v, 1] = pos
                continue
            span[v, 0] = pos
            if self.depth[v] == self.D:
                pos += 1
                span[v, 1] = pos
                continue
            stack.append((v, True))
            for c in self.children[v][::-1]:
                stack.append((int(c), False))
        span.setflags(write=False)
        return span

    @cached_property
    def dfs_leaves(self) -> np.ndarray:
        """Depth-``D`` vertices in depth-first (left-to-right) order."""
        order = np.empty(self.leaves.size, dtype=np.int64)
        order[self.leaf_span[self.leaves, 0]] = self.leaves
        order.setflags(write=False)
        return order

    def __repr__(self) -> str:
        return f"Tree(n={self.n}, D={self.D}, q_max={self.q_max})"


def regular_vertex_count(q: int, D: int) -> int:
    """Number of vertices in the depth-``D`` ball of the ``(q+1)``-regular tree."""
    if D == 0:
        return 1
    if q == 1:
        return 1 + 2 * D
    return 1 + (q + 1) * (q**D - 1) // (q - 1)


def build_regular(q: int, D: int, max_vertices: int = MAX_VERTICES) -> Tree:
    """Depth-``D`` ball of the ``(q+1)``-regular tree, ids in breadth-first order."""
    if q < 1 or D < 1:
        raise DepthError(f"need q >= 1 and D >= 1, got q={q}, D={D}")
    count = regular_vertex_count(q, D)
    if count > max_vertices:
        raise CapacityError(f"{count} vertices exceed the capacity limit {max_vertices}")
    parent = [np.array([-1], dtype=np.int64), np.zeros(q + 1, dtype=np.int64)]
    start, size = 1, q + 1
    for _ in range(2, D + 1):
        level = np.arange(start, start + size, dtype=np.int64)
        parent.append(np.repeat(level, q))
        start, size = start + size, size * q
    return Tree(np.concatenate(parent), max_vertices=max_vertices)


def build_from_parents(pairs: Iterable[tuple[int, int]], max_vertices: int = MAX_VERTICES) -> Tree:
    """Build a tree from ``(child, parent)`` pairs covering ids ``1..n-1``."""
    pairs = [(int(c), int(p)) for c, p in pairs]
    n = len(pairs) + 1
    if n > max_vertices:
        raise CapacityError(f"{n} vertices exceed the capacity limit {max_vertices}")
    parent = np.full(n, -2, dtype=np.int64)
    parent[0] = -1
    for c, p in pairs:
        if not 1 <= c < n:
            raise MalformedTreeError(f"child id {c} outside 1..{n - 1}")
        if parent[c] != -2:
            raise MalformedTreeError(f"vertex {c} listed twice")
        if not 0 <= p < c:
            raise MalformedTreeError(f"vertex {c} has parent {p}; parents must precede children")
        parent[c] = p
    return Tree(parent, max_vertices=max_vertices)


def reroot_distance_base(tree: Tree, base: int, a: int, b: int) -> int:
    """Distance from ``base`` to the last common vertex of ``[base, a]`` and ``[base, b]``."""
    return (tree.distance(base, a) + tree.distance(base, b) - tree.distance(a, b)) // 2
