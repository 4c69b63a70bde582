"""Batched forward-mode automatic differentiation.

:class:`Dual` carries ``k`` directional derivatives at once, so one program
evaluation yields ``k`` Jacobian-vector products.  :class:`SecondOrderDual`
additionally carries mixed second derivatives between a set of row
directions and a set of seed directions; with the identity as row directions
this gives Hessian-vector products by forward-over-forward differentiation.

Both types derive their arithmetic from the operator registry, so every
program that can be traced for sparsity can also be differentiated.
"""
from __future__ import annotations

import numpy as np

from ._overloads import ScalarOverloads, is_constant
from .operators import REGISTRY

__all__ = [
    "Dual",
    "SecondOrderDual",
    "DEFAULT_CHUNK_SIZE",
    "jvp_batch",
    "hvp_batch",
    "dense_jacobian",
    "dense_hessian",
    "gradient",
]

DEFAULT_CHUNK_SIZE = 16


def _value(x):
    return x.value if isinstance(x, _ForwardNumber) else x


class _ForwardNumber(ScalarOverloads):
    __slots__ = ()

    def __lt__(self, other):
        return self.value < _value(other)

    def __le__(self, other):
        return self.value <= _value(other)

    def __gt__(self, other):
        return self.value > _value(other)

    def __ge__(self, other):
        return self.value >= _value(other)

    def __eq__(self, other):
        return self.value == _value(other)

    def __ne__(self, other):
        return self.value != _value(other)

    def __bool__(self):
        return bool(self.value)

    __hash__ = object.__hash__

    def __pow__(self, other):
        if is_constant(other) and other == 1:
            return self
        return self._binary_op("pow", other, False)


class Dual(_ForwardNumber):
    """Real value with a vector of ``k`` directional derivatives."""

    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        self.value = value
        self.partials = partials

    def _unary_op(self, name):
        if name == "neg":
            return Dual(-self.value, -self.partials)
        cls = REGISTRY[name]
        d1, _ = cls.derivatives(self.value)
        return Dual(cls.primal(self.value), d1 * self.partials)

    def _binary_op(self, name, other, reflected):
        if isinstance(other, Dual):
            if other.partials.shape != self.partials.shape:
                raise ValueError(
                    f"dual width mismatch: {self.partials.shape[0]} vs {other.partials.shape[0]}"
                )
        elif not is_constant(other):
            return NotImplemented
        a, b = (other, self) if reflected else (self, other)
        if isinstance(a, Dual) and isinstance(b, Dual):
            av, bv = a.value, b.value
            if name == "add":
                return Dual(av + bv, a.partials + b.partials)
            if name == "sub":
                return Dual(av - bv, a.partials - b.partials)
            if name == "mul":
                return Dual(av * bv, bv * a.partials + av * b.partials)
            cls = REGISTRY[name]
            d = cls.derivatives(av, bv)
            return Dual(cls.primal(av, bv), d[0] * a.partials + d[1] * b.partials)
        if isinstance(a, Dual):
            av, c = a.value, b
            if name == "add":
                return Dual(av + c, a.partials)
            if name == "sub":
                return Dual(av - c, a.partials)
            if name == "mul":
                return Dual(av * c, c * a.partials)
            if name == "div":
                return Dual(av / np.float64(c), a.partials / np.float64(c))
            cls = REGISTRY[name]
            return Dual(cls.primal(av, c), cls.derivatives(av, c)[0] * a.partials)
        c, bv = a, b.value
        if name == "add":
            return Dual(c + bv, b.partials)
        if name == "sub":
            return Dual(c - bv, -b.partials)
        if name == "mul":
            return Dual(c * bv, c * b.partials)
        cls = REGISTRY[name]
        return Dual(cls.primal(c, bv), cls.derivatives(c, bv)[1] * b.partials)

    def __repr__(self):
        return f"Dual({self.value!r}, {self.partials!r})"


class SecondOrderDual(_ForwardNumber):
    """Value with first and mixed second directional derivatives.

    Attributes
    ----------
    value : float
    first : ndarray, shape (p,)
        Derivatives along the row directions.
    tangent : ndarray, shape (q,)
        Derivatives along the seed directions.
    second : ndarray, shape (p, q)
        Mixed second derivatives, ``second[r, s] = u_r^T H v_s``.

    When row and seed directions coincide, ``second`` is symmetric and the
    type reduces to the classic hyper-dual number.
    """

    __slots__ = ("value", "first", "tangent", "second")

    def __init__(self, value, first, tangent, second):
        self.value = value
        self.first = first
        self.tangent = tangent
        self.second = second

    def _unary_op(self, name):
        if name == "neg":
            return SecondOrderDual(-self.value, -self.first, -self.tangent, -self.second)
        cls = REGISTRY[name]
        d1, d11 = cls.derivatives(self.value)
        second = d1 * self.second
        if d11 != 0:
            second = second + d11 * np.outer(self.first, self.tangent)
        return SecondOrderDual(cls.primal(self.value), d1 * self.first, d1 * self.tangent, second)

    def _binary_op(self, name, other, reflected):
        if isinstance(other, SecondOrderDual):
            if other.second.shape != self.second.shape:
                raise ValueError(f"shape mismatch: {self.second.shape} vs {other.second.shape}")
        elif not is_constant(other):
            return NotImplemented
        a, b = (other, self) if reflected else (self, other)
        if isinstance(a, SecondOrderDual) and isinstance(b, SecondOrderDual):
            av, bv = a.value, b.value
            if name == "add":
                return SecondOrderDual(av + bv, a.first + b.first, a.tangent + b.tangent,
                                       a.second + b.second)
            if name == "sub":
                return SecondOrderDual(av - bv, a.first - b.first, a.tangent - b.tangent,
                                       a.second - b.second)
            cls = REGISTRY[name]
            d1, d2, d11, d22, d12 = cls.derivatives(av, bv)
            second = d1 * a.second + d2 * b.second
            if d11 != 0:
                second = second + d11 * np.outer(a.first, a.tangent)
            if d22 != 0:
                second = second + d22 * np.outer(b.first, b.tangent)
            if d12 != 0:
                second = second + d12 * (np.outer(a.first, b.tangent) + np.outer(b.first, a.tangent))
            return SecondOrderDual(cls.primal(av, bv), d1 * a.first + d2 * b.first,
                                   d1 * a.tangent + d2 * b.tangent, second)
        cls = REGISTRY[name]
        # constant operand: only its partner's derivatives enter
        if isinstance(a, SecondOrderDual):
            x, value = a, cls.primal(a.value, b)
            d = cls.derivatives(a.value, b)
            d1, d11 = d[0], d[2]
        else:
            x, value = b, cls.primal(a, b.value)
            d = cls.derivatives(a, b.value)
            d1, d11 = d[1], d[3]
        second = d1 * x.second
        if d11 != 0:
            second = second + d11 * np.outer(x.first, x.tangent)
        return SecondOrderDual(value, d1 * x.first, d1 * x.tangent, second)

    def __repr__(self):
        return f"SecondOrderDual({self.value!r}, first={self.first!r}, second={self.second!r})"


def _as_input(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"input must be a vector, got shape {x.shape}")
    return x


def _outputs(y):
    return np.asarray(y, dtype=object).ravel()


def _check_seeds(S, n):
    S = np.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    if S.ndim != 2 or S.shape[0] != n:
        raise ValueError(f"seed matrix must have {n} rows, got shape {S.shape}")
    return S


def _chunks(k, chunk_size):
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    return [(s, min(s + chunk_size, k)) for s in range(0, k, chunk_size)]


def jvp_batch(f, x, S, chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    """Jacobian-vector products ``J(x) @ S`` for all columns of ``S``.

    Columns are processed ``chunk_size`` at a time, one evaluation of ``f``
    per chunk.

    Returns
    -------
    ndarray, shape (m, k)
    """
    x = _as_input(x)
    S = _check_seeds(S, x.size)
    k = S.shape[1]
    blocks = []
    m = None
    for lo, hi in _chunks(k, chunk_size):
        seeds = S[:, lo:hi]
        xd = np.empty(x.size, dtype=object)
        for i in range(x.size):
            xd[i] = Dual(x[i], seeds[i])
        out = _outputs(f(xd))
        block = np.zeros((out.size, hi - lo))
        for r, y in enumerate(out):
            if isinstance(y, Dual):
                block[r] = y.partials
        if m is not None and out.size != m:
            raise ValueError("function output size changed between evaluations")
        m = out.size
        blocks.append(block)
    if not blocks:
        m = _outputs(f(x)).size
        return np.zeros((m, 0))
    return np.hstack(blocks)


def hvp_batch(f, x, S, chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    """Hessian-vector products ``H(x) @ S`` of a scalar function.

    Returns
    -------
    ndarray, shape (n, k)
    """
    x = _as_input(x)
    n = x.size
    S = _check_seeds(S, n)
    k = S.shape[1]
    eye = np.eye(n)
    blocks = []
    for lo, hi in _chunks(k, chunk_size):
        seeds = S[:, lo:hi]
        zero = np.zeros((n, hi - lo))
        xd = np.empty(n, dtype=object)
        for i in range(n):
            xd[i] = SecondOrderDual(x[i], eye[i], seeds[i], zero)
        out = _outputs(f(xd))
        if out.size != 1:
            raise ValueError(f"Hessians need a scalar function, got {out.size} outputs")
        y = out[0]
        blocks.append(y.second if isinstance(y, SecondOrderDual) else zero)
    if not blocks:
        return np.zeros((n, 0))
    return np.hstack(blocks)


def gradient(f, x) -> np.ndarray:
    """Gradient of a scalar function via one batched evaluation per chunk."""
    J = dense_jacobian(f, x)
    if J.shape[0] != 1:
        raise ValueError(f"gradient needs a scalar function, got {J.shape[0]} outputs")
    return J[0]


def dense_jacobian(f, x, chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    x = _as_input(x)
    return jvp_batch(f, x, np.eye(x.size), chunk_size)


def dense_hessian(f, x, chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    x = _as_input(x)
    return hvp_batch(f, x, np.eye(x.size), chunk_size)
