"""Plain-text file formats (LF line endings, numbers at 17 significant digits).

==========  ==========================================================
tree        ``TREE <n> <D>`` then ``<child> <parent>`` for child 1..n-1
measure     ``MEASURE <D>`` then ``<leaf> <re> <im>`` per depth-D leaf
vfun        ``VFUN <n>`` then ``<vertex> <re> <im>`` per vertex
edges       ``EDGES <n-1>`` then ``<parent> <child> <re> <im>`` per edge
==========  ==========================================================
"""

from __future__ import annotations

import os
import tempfile
from typing import Iterable

import numpy as np

from .errors import FormatError, MissingLeafError
from .measure import BoundaryMeasure, EdgeCoefficients, from_leaf_masses
from .poisson import VertexFunction
from .tree import Tree, build_from_parents


def fmt(x: float) -> str:
    """Shortest-safe decimal: 17 significant digits round-trip every double."""
    return format(float(x), ".17g")


def _lines(text: str) -> list[str]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _header(line: str, tag: str, nfields: int) -> list[int]:
    parts = line.split()
    if len(parts) != nfields + 1 or parts[0] != tag:
        raise FormatError(f"expected header '{tag}' with {nfields} fields, got {line!r}")
    try:
        return [int(p) for p in parts[1:]]
    except ValueError as exc:
        raise FormatError(f"bad header {line!r}") from exc


def _complex_rows(lines: Iterable[str], ncols: int, what: str) -> list[tuple[list[int], complex]]:
    out = []
    for i, line in enumerate(lines, start=2):
        parts = line.split()
        if len(parts) != ncols + 2:
            raise FormatError(f"{what} line {i}: expected {ncols + 2} fields, got {line!r}")
        try:
            ids = [int(p) for p in parts[:ncols]]
            value = complex(float(parts[ncols]), float(parts[ncols + 1]))
        except ValueError as exc:
            raise FormatError(f"{what} line {i}: {line!r}") from exc
        out.append((ids, value))
    return out


# -- tree ---------------------------------------------------------------


def dumps_tree(tree: Tree) -> str:
    rows = [f"TREE {tree.n} {tree.D}"]
    rows.extend(f"{v} {int(tree.parent[v])}" for v in range(1, tree.n))
    return "\n".join(rows) + "\n"


def loads_tree(text: str) -> Tree:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty tree file")
    n, D = _header(lines[0], "TREE", 2)
    body = lines[1:]
    if len(body) != n - 1:
        raise FormatError(f"header announces {n} vertices but {len(body) + 1} are listed")
    pairs = []
    for i, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"tree line {i}: expected '<child> <parent>', got {line!r}")
        try:
            c, p = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError(f"tree line {i}: {line!r}") from exc
        if c != i - 1:
            raise FormatError(f"tree line {i}: children must be listed in increasing id order")
        pairs.append((c, p))
    tree = build_from_parents(pairs)
    if tree.D != D:
        raise FormatError(f"header depth {D} but the tree has depth {tree.D}")
    return tree


# -- measure ------------------------------------------------------------


def dumps_measure(mu: BoundaryMeasure) -> str:
    rows = [f"MEASURE {mu.tree.D}"]
    for leaf, m in zip(mu.tree.leaves, np.asarray(mu.leaf_masses, dtype=np.complex128)):
        rows.append(f"{int(leaf)} {fmt(m.real)} {fmt(m.imag)}")
    return "\n".join(rows) + "\n"


def loads_measure(text: str, tree: Tree) -> BoundaryMeasure:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty measure file")
    (D,) = _header(lines[0], "MEASURE", 1)
    if D != tree.D:
        raise FormatError(f"measure depth {D} does not match tree depth {tree.D}")
    masses = {}
    for ids, value in _complex_rows(lines[1:], 1, "measure"):
        if ids[0] in masses:
            raise FormatError(f"leaf {ids[0]} listed twice")
        masses[ids[0]] = value
    if len(masses) != tree.leaves.size:
        missing = sorted(set(int(v) for v in tree.leaves) - set(masses))
        if missing:
            raise MissingLeafError(f"no mass for leaves {missing[:5]}")
    return from_leaf_masses(tree, masses)


# -- vertex functions ---------------------------------------------------


def dumps_vfun(f: VertexFunction) -> str:
    rows = [f"VFUN {f.tree.n}"]
    rows.extend(f"{v} {fmt(x.real)} {fmt(x.imag)}" for v, x in enumerate(f.values))
    return "\n".join(rows) + "\n"


def loads_vfun(text: str, tree: Tree) -> VertexFunction:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty vfun file")
    (n,) = _header(lines[0], "VFUN", 1)
    if n != tree.n:
        raise FormatError(f"vfun has {n} vertices, tree has {tree.n}")
    rows = _complex_rows(lines[1:], 1, "vfun")
    if [ids[0] for ids, _ in rows] != list(range(n)):
        raise FormatError("vfun rows must list vertices 0..n-1 in order")
    return VertexFunction(tree, np.array([v for _, v in rows], dtype=np.complex128))


# -- edge coefficients --------------------------------------------------


def dumps_edges(coeffs: EdgeCoefficients) -> str:
    tree = coeffs.tree
    rows = [f"EDGES {tree.n - 1}"]
    for u, v in tree.edges():
        c = complex(coeffs.values[v])
        rows.append(f"{u} {v} {fmt(c.real)} {fmt(c.imag)}")
    return "\n".join(rows) + "\n"


def loads_edges(text: str, tree: Tree) -> EdgeCoefficients:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty edge file")
    (m,) = _header(lines[0], "EDGES", 1)
    if m != tree.n - 1:
        raise FormatError(f"edge file has {m} edges, tree has {tree.n - 1}")
    vals = np.full(tree.n, np.nan + 0j)
    for (u, v), c in _complex_rows(lines[1:], 2, "edges"):
        if not 1 <= v < tree.n or tree.parent[v] != u:
            raise FormatError(f"({u}, {v}) is not an edge pointing away from o")
        vals[v] = c
    if np.any(np.isnan(vals[1:])):
        raise FormatError("edge file does not cover every edge")
    return EdgeCoefficients(tree, vals)


# -- files --------------------------------------------------------------


def read_text(path: str) -> str:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return fh.read()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
