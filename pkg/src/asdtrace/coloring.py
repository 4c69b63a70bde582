"""Greedy colorings for Jacobian and Hessian compression.

Colors are 0-based integers.  Both algorithms visit columns (vertices) in
natural order and give each the smallest admissible color.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .detection import SparsityPattern

__all__ = [
    "Coloring",
    "greedy_distance2_coloring",
    "greedy_star_coloring",
    "verify_structural_orthogonality",
    "verify_star",
    "has_bicolored_p4_bruteforce",
    "adjacency",
    "write_coloring_csv",
    "read_coloring_csv",
]


@dataclass(frozen=True)
class Coloring:
    """Assignment of a color to each column (or vertex).

    Attributes
    ----------
    kind : {"column-distance2", "star"}
    colors : ndarray of int
        ``colors[j]`` is the color of column ``j``; colors are contiguous
        from 0.
    """

    kind: str
    colors: np.ndarray

    @property
    def num_colors(self) -> int:
        return int(self.colors.max()) + 1 if self.colors.size else 0

    def groups(self) -> list[np.ndarray]:
        """Columns sharing each color, indexed by color."""
        order = np.argsort(self.colors, kind="stable")
        splits = np.searchsorted(self.colors[order], np.arange(1, self.num_colors))
        return np.split(order, splits)

    def __len__(self):
        return self.colors.size


def _first_free(forbidden, mark):
    c = 0
    while c < len(forbidden) and forbidden[c] == mark:
        c += 1
    return c


def greedy_distance2_coloring(p: SparsityPattern) -> Coloring:
    """Partial distance-2 coloring of the columns of ``p``.

    Two columns get different colors whenever they have a nonzero in a
    common row, so every color group is structurally orthogonal.
    """
    n = p.ncols
    cols = p.columns()
    rows = p.rows
    colors = np.full(n, -1, dtype=np.int64)
    forbidden = np.full(n + 1, -1, dtype=np.int64)
    for j in range(n):
        for i in cols[j]:
            for k in rows[i]:
                c = colors[k]
                if c >= 0:
                    forbidden[c] = j
        colors[j] = _first_free(forbidden, j)
    return Coloring("column-distance2", colors)


def adjacency(p: SparsityPattern) -> list[np.ndarray]:
    """Neighbor lists of the adjacency graph of a symmetric pattern, no self-loops."""
    if not p.is_symmetric():
        raise ValueError("star coloring needs a square symmetric pattern")
    return [r[r != i] for i, r in enumerate(p.rows)]


def greedy_star_coloring(p: SparsityPattern) -> Coloring:
    """Star coloring of the adjacency graph of a symmetric pattern.

    Since the coloring so far has no two-colored path on four vertices, any
    such path created by coloring ``v`` with ``c`` passes through ``v``.
    With ``w`` a colored neighbor of ``v`` and ``x`` a colored neighbor of
    ``w``, color ``c = color(x)`` is ruled out when

    * ``v`` is an end: ``x`` has a second neighbor colored like ``w``;
    * ``v`` is inside: ``v`` has a second neighbor colored like ``w``.

    Together with the distance-1 condition this is exact, so the result is
    the greedy star coloring in natural order.  Diagonal entries are ignored.
    """
    n = p.nrows
    adj = adjacency(p)
    colors = np.full(n, -1, dtype=np.int64)
    forbidden = np.full(n + 1, -1, dtype=np.int64)
    # nbr_count[u][d]: number of colored neighbors of u that have color d
    nbr_count: list[dict[int, int]] = [{} for _ in range(n)]
    for v in range(n):
        mine = nbr_count[v]
        for w in adj[v]:
            d = colors[w]
            if d < 0:
                continue
            forbidden[d] = v
            inside = mine.get(d, 0) >= 2
            for x in adj[w]:
                cx = colors[x]
                if x == v or cx < 0:
                    continue
                if inside or nbr_count[x].get(d, 0) >= 2:
                    forbidden[cx] = v
        c = _first_free(forbidden, v)
        colors[v] = c
        for w in adj[v]:
            cnt = nbr_count[w]
            cnt[c] = cnt.get(c, 0) + 1
    return Coloring("star", colors)


def verify_structural_orthogonality(p: SparsityPattern, c: Coloring) -> bool:
    """True iff no row holds two nonzeros from columns of the same color."""
    if len(c) != p.ncols:
        raise ValueError(f"coloring covers {len(c)} columns, pattern has {p.ncols}")
    for r in p.rows:
        if r.size and np.unique(c.colors[r]).size != r.size:
            return False
    return True


def verify_star(p: SparsityPattern, c: Coloring) -> bool:
    """True iff ``c`` is a proper coloring without two-colored 4-vertex paths.

    A path ``a-b-x-y`` alternates two colors exactly when ``b`` has at least
    two neighbors colored like ``x`` and ``x`` has at least two neighbors
    colored like ``b``; this is checked edge by edge.
    """
    adj = adjacency(p)
    if len(c) != p.nrows:
        raise ValueError(f"coloring covers {len(c)} vertices, pattern has {p.nrows}")
    col = c.colors
    counts = []
    for v, nb in enumerate(adj):
        if nb.size and np.any(col[nb] == col[v]):
            return False
        vals, cnt = np.unique(col[nb], return_counts=True)
        counts.append(dict(zip(vals.tolist(), cnt.tolist())))
    for b, nb in enumerate(adj):
        for x in nb:
            if x > b and counts[b][col[x]] >= 2 and counts[x][col[b]] >= 2:
                return False
    return True


def has_bicolored_p4_bruteforce(p: SparsityPattern, c: Coloring) -> bool:
    """Enumerate all simple 4-vertex paths; for small graphs only."""
    adj = [set(a.tolist()) for a in adjacency(p)]
    col = c.colors
    n = len(adj)
    for a, b, x, y in permutations(range(n), 4):
        if b in adj[a] and x in adj[b] and y in adj[x]:
            if col[a] == col[x] and col[b] == col[y]:
                return True
    return False


def write_coloring_csv(path, c: Coloring) -> None:
    """CSV with header ``column,color`` and 1-based indices."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["column", "color"])
        for j, k in enumerate(c.colors):
            w.writerow([j + 1, int(k) + 1])


def read_coloring_csv(path, kind: str = "column-distance2") -> Coloring:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"column", "color"}:
        raise ValueError(f"{path}: expected a 'column,color' header")
    colors = np.full(len(rows), -1, dtype=np.int64)
    for r in rows:
        colors[int(r["column"]) - 1] = int(r["color"]) - 1
    if (colors < 0).any():
        raise ValueError(f"{path}: missing or invalid column entries")
    return Coloring(kind, colors)
