"""Automatic sparse differentiation: prepare once, then evaluate cheaply.

Preparation detects the sparsity pattern, colors it and precomputes seed
vectors plus, for every structural nonzero, where to read it from the
compressed product.  Evaluation is then one batched forward pass per
chunk of colors followed by a gather.

Results are :class:`scipy.sparse.csc_matrix` objects whose stored entries
are exactly the pattern's structural nonzeros (explicit zeros included).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import forward_ad
from .coloring import Coloring, greedy_distance2_coloring, greedy_star_coloring
from .detection import SparsityPattern, hessian_pattern, jacobian_pattern

__all__ = [
    "JacobianPrep",
    "HessianPrep",
    "prepare_jacobian",
    "prepare_jacobian_from_pattern",
    "prepare_hessian",
    "prepare_hessian_from_pattern",
    "sparse_jacobian",
    "sparse_hessian",
    "seed_matrix",
]


def seed_matrix(coloring: Coloring, pattern: SparsityPattern | None = None) -> np.ndarray:
    """``n x c`` 0/1 matrix whose column ``k`` sums the basis vectors of color ``k``.

    An all-zero ``pattern`` needs no products at all, so it gets ``n x 0``.
    """
    n = len(coloring)
    if pattern is not None and pattern.nnz == 0:
        return np.zeros((n, 0))
    S = np.zeros((n, coloring.num_colors))
    S[np.arange(n), coloring.colors] = 1.0
    return S


def _csc_layout(p: SparsityPattern):
    """Row indices and indptr of ``p`` in column-major order."""
    cols = p.columns()
    indptr = np.zeros(p.ncols + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([c.size for c in cols])
    rows = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    colidx = np.repeat(np.arange(p.ncols, dtype=np.int64), np.diff(indptr))
    return rows.astype(np.int64), colidx, indptr


@dataclass(frozen=True, eq=False)
class _Prep:
    pattern: SparsityPattern
    coloring: Coloring
    seeds: np.ndarray
    # entry e of the CSC layout is read from compressed[src_row[e], src_col[e]]
    src_row: np.ndarray
    src_col: np.ndarray
    indices: np.ndarray
    indptr: np.ndarray
    mode: str = "global"
    anchor: np.ndarray | None = None

    @property
    def num_colors(self) -> int:
        return self.coloring.num_colors

    @property
    def num_products(self) -> int:
        """Seed columns per evaluation: ``num_colors``, or 0 for an empty pattern."""
        return self.seeds.shape[1]

    @property
    def n(self) -> int:
        return self.pattern.ncols

    def compress(self, A) -> np.ndarray:
        """``A @ seeds`` for a matrix supported on the pattern."""
        A = sp.csr_matrix(A) if sp.issparse(A) else np.asarray(A, dtype=float)
        return np.asarray(A @ self.seeds)

    def decompress(self, B) -> sp.csc_matrix:
        """Gather the structural nonzeros out of a compressed matrix."""
        B = np.asarray(B, dtype=float)
        expected = (self.pattern.nrows, self.num_products)
        if B.shape != expected:
            raise ValueError(f"compressed matrix has shape {B.shape}, expected {expected}")
        data = B[self.src_row, self.src_col] if self.src_row.size else np.zeros(0)
        return sp.csc_matrix((data, self.indices.copy(), self.indptr.copy()),
                             shape=self.pattern.shape)

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"input must have length {self.n}, got shape {x.shape}")
        return x


@dataclass(frozen=True, eq=False)
class JacobianPrep(_Prep):
    """Pattern, column coloring, seeds and gather map for sparse Jacobians."""


@dataclass(frozen=True, eq=False)
class HessianPrep(_Prep):
    """Symmetric pattern, star coloring, seeds and gather map for sparse Hessians."""


def prepare_jacobian_from_pattern(pattern: SparsityPattern, *, mode="global",
                                  anchor=None) -> JacobianPrep:
    """Build a Jacobian prep from a known (e.g. imported) pattern."""
    coloring = greedy_distance2_coloring(pattern)
    rows, colidx, indptr = _csc_layout(pattern)
    return JacobianPrep(pattern, coloring, seed_matrix(coloring, pattern), rows,
                        coloring.colors[colidx], rows, indptr, mode, anchor)


def prepare_jacobian(f, n=None, m=None, *, mode="global", x=None, backend=None,
                     inplace=False) -> JacobianPrep:
    """Detect, color and build seeds for the Jacobian of ``f``.

    A global prep is valid at every input.  A local prep (``mode="local"``)
    stores its anchor point ``x``; reusing it elsewhere is allowed but the
    pattern may then miss entries.
    """
    pattern = jacobian_pattern(f, n, x=x, mode=mode, m=m, backend=backend, inplace=inplace)
    anchor = None if mode == "global" else np.array(x, dtype=float)
    return prepare_jacobian_from_pattern(pattern, mode=mode, anchor=anchor)


def sparse_jacobian(f, x, prep: JacobianPrep | None = None,
                    chunk_size: int = forward_ad.DEFAULT_CHUNK_SIZE) -> sp.csc_matrix:
    """Sparse Jacobian of ``f`` at ``x`` using ``num_colors`` JVPs.

    Without ``prep`` a global prep is computed first (unprepared ASD).
    """
    if prep is None:
        prep = prepare_jacobian(f, np.asarray(x).size)
    x = prep._check_input(x)
    B = forward_ad.jvp_batch(f, x, prep.seeds, chunk_size)
    if B.shape[0] != prep.pattern.nrows:
        raise ValueError(f"function has {B.shape[0]} outputs, prep expects {prep.pattern.nrows}")
    return prep.decompress(B)


def _symmetric_routes(pattern: SparsityPattern, colors: np.ndarray, rows, colidx):
    """Source of every entry ``(i, j)`` in a star-colored symmetric pattern.

    ``(i, j)`` can be read from ``B[i, color(j)]`` when ``j`` is the only
    column of that color in row ``i``, otherwise from ``B[j, color(i)]``.
    Each unordered pair is routed once so both triangles share a source.
    """
    counts = []
    for r in pattern.rows:
        c, k = np.unique(colors[r], return_counts=True)
        counts.append(dict(zip(c.tolist(), k.tolist())))
    src_row = np.empty(rows.size, dtype=np.int64)
    src_col = np.empty(rows.size, dtype=np.int64)
    chosen: dict[tuple[int, int], tuple[int, int]] = {}
    for e, (i, j) in enumerate(zip(rows.tolist(), colidx.tolist())):
        key = (min(i, j), max(i, j))
        route = chosen.get(key)
        if route is None:
            a, b = key
            if counts[a][colors[b]] == 1:
                route = (a, int(colors[b]))
            elif counts[b][colors[a]] == 1:
                route = (b, int(colors[a]))
            else:
                raise ValueError(f"coloring is not symmetrically orthogonal at entry ({a}, {b})")
            chosen[key] = route
        src_row[e], src_col[e] = route
    return src_row, src_col


def prepare_hessian_from_pattern(pattern: SparsityPattern, *, mode="global",
                                 anchor=None) -> HessianPrep:
    """Build a Hessian prep from a known symmetric pattern."""
    coloring = greedy_star_coloring(pattern)
    rows, colidx, indptr = _csc_layout(pattern)
    src_row, src_col = _symmetric_routes(pattern, coloring.colors, rows, colidx)
    return HessianPrep(pattern, coloring, seed_matrix(coloring, pattern), src_row, src_col,
                       rows, indptr, mode, anchor)


def prepare_hessian(f, n=None, *, mode="global", x=None, backend=None) -> HessianPrep:
    """Detect, star-color and route the Hessian of a scalar function ``f``."""
    pattern = hessian_pattern(f, n, x=x, mode=mode, backend=backend)
    anchor = None if mode == "global" else np.array(x, dtype=float)
    return prepare_hessian_from_pattern(pattern, mode=mode, anchor=anchor)


def sparse_hessian(f, x, prep: HessianPrep | None = None,
                   chunk_size: int = forward_ad.DEFAULT_CHUNK_SIZE) -> sp.csc_matrix:
    """Sparse Hessian of scalar ``f`` at ``x`` using ``num_colors`` HVPs."""
    if prep is None:
        prep = prepare_hessian(f, np.asarray(x).size)
    x = prep._check_input(x)
    B = forward_ad.hvp_batch(f, x, prep.seeds, chunk_size)
    return prep.decompress(B)
