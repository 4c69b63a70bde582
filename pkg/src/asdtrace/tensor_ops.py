"""Matrix-level overloads for arrays of global tracers.

Tracing ``A @ B`` entry by entry costs one union per product and one per
sum.  Because ``+`` and ``*`` both pass both argument patterns through,
entry ``(i, j)`` of the result is simply the union of row ``i`` of ``A``
and column ``j`` of ``B``, so precomputing those unions gives the same
pattern with far fewer set operations.
"""
from __future__ import annotations

import numpy as np

from ._overloads import is_constant
from .pattern_store import IndexSet, pair_product
from .tracers import GradientTracer, HessianTracer, is_global_tracer

__all__ = ["tracer_matmul", "matmul", "conservative_collapse", "det", "norm"]


def _as_matrix(A, name):
    A = np.asarray(A, dtype=object)
    if A.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {A.shape}")
    return A


def _reference(*arrays):
    for arr in arrays:
        for v in arr.flat:
            if is_global_tracer(v):
                return v
    return None


def _pattern(v, ref) -> IndexSet:
    if isinstance(v, GradientTracer):
        return v.grad
    if is_constant(v):
        return type(ref.grad).empty(ref.capacity)
    raise TypeError(f"tracer_matmul needs GradientTracer or constant entries, got {type(v).__name__}")


def _union_all(sets):
    out = sets[0]
    for s in sets[1:]:
        out = out.union(s)
    return out


def tracer_matmul(A, B) -> np.ndarray:
    """Pattern of ``A @ B`` for matrices of :class:`GradientTracer` (or constants).

    Uses ``(n + m)(p - 1) + n m`` unions instead of the ``n m (2p - 1)``
    needed by the elementwise product.

    Raises
    ------
    ValueError
        On mismatched inner dimensions or an empty inner dimension.
    """
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    n, p = A.shape
    p2, m = B.shape
    if p != p2:
        raise ValueError(f"inner dimensions differ: {A.shape} @ {B.shape}")
    if p == 0:
        raise ValueError("inner dimension must be positive")
    ref = _reference(A, B)
    if ref is None:
        return A.astype(float) @ B.astype(float)
    rows = [_union_all([_pattern(v, ref) for v in A[i]]) for i in range(n)]
    cols = [_union_all([_pattern(v, ref) for v in B[:, j]]) for j in range(m)]
    capacity = ref.capacity
    for s in rows + cols:
        if s.capacity != capacity:
            raise ValueError(f"capacity mismatch: {s.capacity} vs {capacity}")
    C = np.empty((n, m), dtype=object)
    for i in range(n):
        for j in range(m):
            C[i, j] = GradientTracer(rows[i].union(cols[j]))
    return C


def matmul(A, B):
    """``A @ B`` that takes the fast path for global gradient tracers.

    Local tracers, Hessian tracers and numbers use ordinary elementwise
    arithmetic.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim == 2 and B.ndim == 2 and object in (A.dtype, B.dtype):
        entries = [v for arr in (A, B) for v in arr.flat]
        fast = all(isinstance(v, GradientTracer) or is_constant(v) for v in entries)
        if fast and any(isinstance(v, GradientTracer) for v in entries):
            return tracer_matmul(A, B)
    return A @ B


def conservative_collapse(op: str, A):
    """Single tracer depending on every entry of ``A``.

    The gradient pattern is the union of all entry patterns.  For Hessian
    tracers the Hessian pattern is the full product of that union with
    itself (joined with the entries' own Hessian patterns).

    Raises
    ------
    ValueError
        If ``A`` is empty, ``op`` is unknown, or ``A`` holds no global tracer.
    """
    if op not in ("det", "norm"):
        raise ValueError(f"unknown collapsed operator {op!r}")
    A = np.asarray(A, dtype=object)
    if A.size == 0:
        raise ValueError("cannot collapse an empty matrix")
    ref = _reference(A)
    if ref is None:
        raise ValueError("conservative_collapse needs at least one global tracer")
    kind = type(ref)
    grad = type(ref.grad).empty(ref.capacity)
    hess = None
    for v in A.flat:
        if is_constant(v):
            continue
        if type(v) is not kind:
            raise TypeError(f"mixed entry types {kind.__name__} and {type(v).__name__}")
        grad = grad.union(v.grad)
        if kind is HessianTracer:
            hess = v.hess if hess is None else hess.union(v.hess)
    if kind is HessianTracer:
        return HessianTracer(grad, hess.union(pair_product(grad, grad)))
    return GradientTracer(grad)


def _abs_value(v):
    for attr in ("primal", "value"):
        if hasattr(v, attr):
            return abs(getattr(v, attr))
    return abs(v)


def _det_elimination(A):
    # Gaussian elimination with partial pivoting on the numeric value
    A = A.copy()
    k = A.shape[0]
    sign = 1.0
    result = 1.0
    for c in range(k):
        piv = max(range(c, k), key=lambda r: _abs_value(A[r, c]))
        if _abs_value(A[piv, c]) == 0:
            return 0.0 * A[c, c]
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
            sign = -sign
        result = result * A[c, c]
        for r in range(c + 1, k):
            factor = A[r, c] / A[c, c]
            for j in range(c + 1, k):
                A[r, j] = A[r, j] - factor * A[c, j]
    return sign * result


def det(A):
    """Determinant of a square matrix of numbers, dual numbers or tracers."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"det needs a square matrix, got shape {A.shape}")
    if A.dtype != object:
        return np.linalg.det(A)
    if _reference(A) is not None:
        return conservative_collapse("det", A)
    return _det_elimination(A)


def norm(x):
    """Euclidean (Frobenius for matrices) norm."""
    x = np.asarray(x)
    if x.dtype != object:
        return np.linalg.norm(x)
    if x.size and _reference(x) is not None:
        return conservative_collapse("norm", x)
    from .ops import sqrt

    return sqrt(np.sum(x * x))
