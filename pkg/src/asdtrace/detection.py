"""Jacobian and Hessian sparsity detection by tracer propagation."""
from __future__ import annotations

import warnings
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from ._overloads import is_constant
from .pattern_store import IndexSet, get_backend
from .tracers import GradientTracer, HessianTracer, LocalTracer

__all__ = [
    "SparsityPattern",
    "NonFinitePrimalWarning",
    "jacobian_pattern_global",
    "jacobian_pattern_local",
    "hessian_pattern_global",
    "hessian_pattern_local",
    "jacobian_pattern",
    "hessian_pattern",
]


class NonFinitePrimalWarning(RuntimeWarning):
    """A locally traced program produced a NaN or infinite output."""


class SparsityPattern:
    """Boolean ``m x n`` structure stored as sorted column indices per row.

    Parameters
    ----------
    shape : (int, int)
    rows : sequence of array_like
        ``rows[i]`` lists the columns of the nonzeros in row ``i``.
    """

    __slots__ = ("shape", "rows", "_columns")

    def __init__(self, shape: tuple[int, int], rows: Sequence):
        m, n = shape
        if len(rows) != m:
            raise ValueError(f"expected {m} rows, got {len(rows)}")
        clean = []
        for i, r in enumerate(rows):
            r = np.unique(np.asarray(r, dtype=np.int64))
            if r.size and (r[0] < 0 or r[-1] >= n):
                raise ValueError(f"row {i} has a column index outside [0, {n})")
            clean.append(r)
        self.shape = (int(m), int(n))
        self.rows = tuple(clean)
        self._columns = None

    # construction -------------------------------------------------------
    @classmethod
    def from_index_sets(cls, sets: Sequence[IndexSet], n: int) -> "SparsityPattern":
        return cls((len(sets), n), [s.to_array() for s in sets])

    @classmethod
    def from_coo(cls, rows, cols, shape) -> "SparsityPattern":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= shape[0]):
            raise ValueError("row index out of bounds")
        order = np.argsort(rows, kind="stable")
        splits = np.searchsorted(rows[order], np.arange(1, shape[0]))
        return cls(shape, np.split(cols[order], splits))

    @classmethod
    def from_dense(cls, A) -> "SparsityPattern":
        A = np.asarray(A)
        r, c = np.nonzero(A)
        return cls.from_coo(r, c, A.shape)

    @classmethod
    def from_scipy(cls, A) -> "SparsityPattern":
        A = sp.coo_matrix(A)
        return cls.from_coo(A.row, A.col, A.shape)

    # views --------------------------------------------------------------
    @property
    def nrows(self) -> int:
        return self.shape[0]

    @property
    def ncols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return int(sum(r.size for r in self.rows))

    def columns(self) -> tuple[np.ndarray, ...]:
        """Per-column row indices (the transpose of the row storage)."""
        if self._columns is None:
            r, c = self.to_coo()
            self._columns = SparsityPattern.from_coo(c, r, self.shape[::-1]).rows
        return self._columns

    def to_coo(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column indices of the nonzeros, in row-major order."""
        counts = [r.size for r in self.rows]
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), counts)
        cols = np.concatenate(self.rows) if self.rows else np.zeros(0, dtype=np.int64)
        return rows, cols.astype(np.int64)

    def to_scipy(self) -> sp.csr_matrix:
        r, c = self.to_coo()
        return sp.csr_matrix((np.ones(r.size, dtype=bool), (r, c)), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=bool)
        r, c = self.to_coo()
        out[r, c] = True
        return out

    def transpose(self) -> "SparsityPattern":
        return SparsityPattern(self.shape[::-1], self.columns())

    T = property(transpose)

    @property
    def density(self) -> float:
        return self.nnz / (self.nrows * self.ncols)

    @property
    def zeros_percent(self) -> float:
        """Share of structural zeros, in percent."""
        return 100.0 * (1.0 - self.density)

    def is_symmetric(self) -> bool:
        if self.nrows != self.ncols:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.rows, self.columns()))

    def issubset(self, other: "SparsityPattern") -> bool:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return all(np.isin(a, b, assume_unique=True).all() for a, b in zip(self.rows, other.rows))

    def __le__(self, other):
        return self.issubset(other)

    def __lt__(self, other):
        return self.issubset(other) and self != other

    def __eq__(self, other):
        if not isinstance(other, SparsityPattern):
            return NotImplemented
        return self.shape == other.shape and all(
            np.array_equal(a, b) for a, b in zip(self.rows, other.rows)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparsityPattern(shape={self.shape}, nnz={self.nnz})"


# --------------------------------------------------------------------------
# seeding and collection


def _seed_global(n, tracer, backend):
    setcls = get_backend(backend, n)
    x = np.empty(n, dtype=object)
    for j in range(n):
        x[j] = tracer(setcls.singleton(j, n))
    return x, setcls


def _seed_local(x, tracer, backend):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"input must be a vector, got shape {x.shape}")
    n = x.size
    setcls = get_backend(backend, n)
    xt = np.empty(n, dtype=object)
    for j in range(n):
        xt[j] = LocalTracer(float(x[j]), tracer(setcls.singleton(j, n)))
    return xt, setcls


def _run(f, xt, m, inplace, constant):
    if inplace:
        if m is None:
            raise ValueError("in-place programs need the output size m")
        out = np.empty(m, dtype=object)
        for i in range(m):
            out[i] = constant
        f(out, xt)
    else:
        out = f(xt)
    out = np.asarray(out, dtype=object).ravel()
    if m is not None and out.size != m:
        raise ValueError(f"expected {m} outputs, got {out.size}")
    return out


def _inner(y, kind):
    if isinstance(y, LocalTracer):
        y = y.inner
    if isinstance(y, kind):
        return y
    if is_constant(y):
        return None
    raise TypeError(f"traced program returned a {type(y).__name__}, expected {kind.__name__} values")


def _warn_nonfinite(out):
    bad = [i for i, y in enumerate(out)
           if isinstance(y, LocalTracer) and not np.isfinite(y.primal)]
    if bad:
        warnings.warn(
            f"non-finite primal values in outputs {bad[:10]}; the local pattern may be unreliable",
            NonFinitePrimalWarning,
            stacklevel=3,
        )


def _collect_jacobian(out, n, setcls):
    sets = []
    for y in out:
        t = _inner(y, GradientTracer)
        sets.append(setcls.empty(n) if t is None else t.grad)
    return SparsityPattern.from_index_sets(sets, n)


def jacobian_pattern_global(
    f: Callable, n: int, m: int | None = None, *, backend=None, inplace: bool = False
) -> SparsityPattern:
    """Global Jacobian sparsity pattern of ``f: R^n -> R^m``.

    ``f`` receives an object array of ``n`` tracers and returns an array-like
    of outputs.  With ``inplace=True`` it is called as ``f(out, x)`` and
    writes ``m`` outputs into ``out``.  The result is valid at every input.

    Raises
    ------
    MissingPrimalError
        If ``f`` branches on its input values.
    """
    xt, setcls = _seed_global(n, GradientTracer, backend)
    out = _run(f, xt, m, inplace, GradientTracer(setcls.empty(n)))
    return _collect_jacobian(out, n, setcls)


def jacobian_pattern_local(
    f: Callable, x, m: int | None = None, *, backend=None, inplace: bool = False
) -> SparsityPattern:
    """Jacobian sparsity pattern valid at the point ``x``.

    Value-dependent operators (``max``, ``min``, comparisons, ``if``
    statements) follow the branch taken at ``x``, so the result can be
    strictly sparser than the global pattern.
    """
    xt, setcls = _seed_local(x, GradientTracer, backend)
    n = xt.size
    out = _run(f, xt, m, inplace, LocalTracer(0.0, GradientTracer(setcls.empty(n))))
    _warn_nonfinite(out)
    return _collect_jacobian(out, n, setcls)


def _collect_hessian(out, n):
    if out.size != 1:
        raise ValueError(f"Hessian detection needs a scalar function, got {out.size} outputs")
    t = _inner(out[0], HessianTracer)
    if t is None:
        return SparsityPattern((n, n), [()] * n)
    rows = [()] * n
    for i, js in t.hess.rows.items():
        rows[i] = js.to_array()
    return SparsityPattern((n, n), rows)


def hessian_pattern_global(f: Callable, n: int, *, backend=None) -> SparsityPattern:
    """Global (symmetric) Hessian sparsity pattern of a scalar function."""
    xt, _ = _seed_global(n, HessianTracer, backend)
    return _collect_hessian(_run(f, xt, None, False, None), n)


def hessian_pattern_local(f: Callable, x, *, backend=None) -> SparsityPattern:
    """Hessian sparsity pattern valid at ``x``."""
    xt, _ = _seed_local(x, HessianTracer, backend)
    out = _run(f, xt, None, False, None)
    _warn_nonfinite(out)
    return _collect_hessian(out, xt.size)


def jacobian_pattern(f, n=None, *, x=None, mode="global", m=None, backend=None, inplace=False):
    """Dispatch to global or local Jacobian detection."""
    if mode == "global":
        if n is None:
            n = np.asarray(x).size
        return jacobian_pattern_global(f, n, m, backend=backend, inplace=inplace)
    if mode == "local":
        if x is None:
            raise ValueError("local detection needs an input point x")
        return jacobian_pattern_local(f, x, m, backend=backend, inplace=inplace)
    raise ValueError(f"mode must be 'global' or 'local', got {mode!r}")


def hessian_pattern(f, n=None, *, x=None, mode="global", backend=None):
    """Dispatch to global or local Hessian detection."""
    if mode == "global":
        if n is None:
            n = np.asarray(x).size
        return hessian_pattern_global(f, n, backend=backend)
    if mode == "local":
        if x is None:
            raise ValueError("local detection needs an input point x")
        return hessian_pattern_local(f, x, backend=backend)
    raise ValueError(f"mode must be 'global' or 'local', got {mode!r}")
