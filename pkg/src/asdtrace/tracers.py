"""Tracer number types propagating gradient and Hessian sparsity patterns.

Global tracers (:class:`GradientTracer`, :class:`HessianTracer`) carry no
primal value, so the patterns they produce hold for every input.  Wrapping
one in a :class:`LocalTracer` adds the primal and lets value-dependent
operators such as ``max`` contribute only the argument that matters.
"""
from __future__ import annotations

import os
import traceback

import numpy as np

from ._overloads import ScalarOverloads, is_constant
from .operators import REGISTRY, OperatorClassification
from .pattern_store import IndexPairSet, IndexSet, pair_product

__all__ = [
    "MissingPrimalError",
    "GradientTracer",
    "HessianTracer",
    "LocalTracer",
    "GlobalCondition",
    "propagate_first_order",
    "propagate_second_order",
    "apply_local",
    "select",
    "compare",
    "is_global_tracer",
]

_PKG_DIR = os.path.dirname(os.path.abspath(__file__))
_NUMPY_DIR = os.path.dirname(os.path.abspath(np.__file__))


def _call_site() -> str:
    for frame in reversed(traceback.extract_stack()[:-1]):
        path = os.path.abspath(frame.filename)
        if not path.startswith((_PKG_DIR, _NUMPY_DIR)):
            return f"{frame.filename}:{frame.lineno} in {frame.name}"
    return "<unknown call site>"


class MissingPrimalError(RuntimeError):
    """A global tracer reached an operation that needs a concrete value.

    This usually means the traced program branches on its inputs.  Use
    ``ops.select`` instead of ``if``/``else``, or trace in local mode.
    """

    def __init__(self, operator: str, call_site: str | None = None):
        self.operator = operator
        self.call_site = call_site if call_site is not None else _call_site()
        super().__init__(
            f"operator {operator!r} needs a primal value, which global tracers do not carry "
            f"(at {self.call_site}); use ops.select for branches or switch to local detection"
        )


def _empty_like(s: IndexSet) -> IndexSet:
    return type(s).empty(s.capacity)


def _first_order(d1, d2, a: IndexSet | None, b: IndexSet | None) -> IndexSet:
    # None stands for a constant operand, i.e. an empty pattern
    if d1 and a is not None:
        if d2 and b is not None:
            return a.union(b)
        return a
    if d2 and b is not None:
        return b
    return _empty_like(a if a is not None else b)


def _empty_pairs(s: IndexSet) -> IndexPairSet:
    return IndexPairSet({}, s.capacity, type(s))


def _second_order(flags, a, b):
    """Hessian propagation on (grad, hess) tuples; ``None`` is a constant."""
    if len(flags) == 2:
        d1, d11 = flags
        ga, ha = a
        grad = _first_order(d1, False, ga, None)
        hess = ha if d1 else _empty_pairs(ga)
        if d11 and not ga.is_empty():
            hess = hess.union(pair_product(ga, ga))
        return grad, hess
    d1, d2, d11, d22, d12 = flags
    ref = (a if a is not None else b)[0]
    empty = _empty_like(ref)
    ga, ha = a if a is not None else (empty, None)
    gb, hb = b if b is not None else (empty, None)
    grad = _first_order(d1, d2, a[0] if a is not None else None, b[0] if b is not None else None)
    hess = _empty_pairs(ref)
    if d1 and ha is not None:
        hess = hess.union(ha)
    if d2 and hb is not None:
        hess = hess.union(hb)
    if d11 and not ga.is_empty():
        hess = hess.union(pair_product(ga, ga))
    if d22 and not gb.is_empty():
        hess = hess.union(pair_product(gb, gb))
    if d12 and not ga.is_empty() and not gb.is_empty():
        hess = hess.union(pair_product(ga, gb))
    return grad, hess


def _check_arity(cls: OperatorClassification, b_given: bool):
    if (cls.arity == 2) != b_given:
        raise TypeError(f"operator {cls.name!r} has arity {cls.arity}")


def propagate_first_order(
    cls: OperatorClassification, a: IndexSet, b: IndexSet | None = None, primals=None
) -> IndexSet:
    """Gradient pattern of ``cls(alpha, beta)`` from the argument patterns.

    Returns the union of the argument patterns whose first-derivative flag is
    set.  With ``primals`` given, local flags are evaluated at those values.
    """
    _check_arity(cls, b is not None)
    if b is not None and b.capacity != a.capacity:
        raise ValueError(f"capacity mismatch: {a.capacity} vs {b.capacity}")
    flags = cls.flags(primals)
    if cls.arity == 1:
        return _first_order(flags[0], False, a, None)
    return _first_order(flags[0], flags[1], a, b)


def propagate_second_order(cls, a: "HessianTracer", b: "HessianTracer | None" = None, primals=None):
    """Second-order propagation: returns a new :class:`HessianTracer`."""
    _check_arity(cls, b is not None)
    flags = cls.flags(primals)
    grad, hess = _second_order(
        flags, (a.grad, a.hess), None if b is None else (b.grad, b.hess)
    )
    return HessianTracer(grad, hess)


class _GlobalTracer(ScalarOverloads):
    __slots__ = ()

    # value-dependent operations are refused rather than guessed
    def __bool__(self):
        raise MissingPrimalError("bool")

    def __lt__(self, other):
        raise MissingPrimalError("<")

    def __le__(self, other):
        raise MissingPrimalError("<=")

    def __gt__(self, other):
        raise MissingPrimalError(">")

    def __ge__(self, other):
        raise MissingPrimalError(">=")

    def __eq__(self, other):
        raise MissingPrimalError("==")

    def __ne__(self, other):
        raise MissingPrimalError("!=")

    def __float__(self):
        raise MissingPrimalError("float")

    def __int__(self):
        raise MissingPrimalError("int")

    def __index__(self):
        raise MissingPrimalError("index")

    __hash__ = object.__hash__

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if is_constant(other):
            return None
        return NotImplemented

    def __pow__(self, other):
        # constant exponents follow repeated multiplication
        if is_constant(other):
            if other == 0:
                return self._constant()
            if other == 1:
                return self
        return self._binary_op("pow", other, False)

    @property
    def capacity(self) -> int:
        return self.grad.capacity


class GradientTracer(_GlobalTracer):
    """Number type holding only a gradient sparsity pattern."""

    __slots__ = ("grad",)

    def __init__(self, grad: IndexSet):
        self.grad = grad

    def _constant(self):
        return GradientTracer(_empty_like(self.grad))

    def _unary_op(self, name):
        cls = REGISTRY[name]
        return GradientTracer(_first_order(cls.global_flags()[0], False, self.grad, None))

    def _binary_op(self, name, other, reflected):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        cls = REGISTRY[name]
        a = self.grad
        b = None if other is None else other.grad
        if b is not None and b.capacity != a.capacity:
            raise ValueError(f"capacity mismatch: {a.capacity} vs {b.capacity}")
        if reflected:
            a, b = b, a
        flags = cls.global_flags()
        return GradientTracer(_first_order(flags[0], flags[1], a, b))

    def __repr__(self):
        return f"GradientTracer({list(self.grad)})"


class HessianTracer(_GlobalTracer):
    """Number type holding gradient and Hessian sparsity patterns."""

    __slots__ = ("grad", "hess")

    def __init__(self, grad: IndexSet, hess: IndexPairSet | None = None):
        self.grad = grad
        self.hess = hess if hess is not None else _empty_pairs(grad)

    def _constant(self):
        return HessianTracer(_empty_like(self.grad))

    def _unary_op(self, name):
        grad, hess = _second_order(REGISTRY[name].global_flags(), (self.grad, self.hess), None)
        return HessianTracer(grad, hess)

    def _binary_op(self, name, other, reflected):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other is not None and other.capacity != self.capacity:
            raise ValueError(f"capacity mismatch: {self.capacity} vs {other.capacity}")
        a = (self.grad, self.hess)
        b = None if other is None else (other.grad, other.hess)
        if reflected:
            a, b = b, a
        grad, hess = _second_order(REGISTRY[name].global_flags(), a, b)
        return HessianTracer(grad, hess)

    def __repr__(self):
        return f"HessianTracer(grad={list(self.grad)}, hess={sorted(self.hess)})"


def is_global_tracer(x) -> bool:
    return isinstance(x, _GlobalTracer)


def _inner_apply(flags, a, b):
    """Propagate inner global tracers (or ``None`` constants) with given flags."""
    ref = a if a is not None else b
    if isinstance(ref, HessianTracer):
        grad, hess = _second_order(
            flags,
            None if a is None else (a.grad, a.hess),
            None if b is None else (b.grad, b.hess),
        )
        return HessianTracer(grad, hess)
    if len(flags) == 2:
        return GradientTracer(_first_order(flags[0], False, a.grad, None))
    return GradientTracer(_first_order(flags[0], flags[1], None if a is None else a.grad,
                                       None if b is None else b.grad))


class LocalTracer(ScalarOverloads):
    """Primal value paired with a global tracer; flags are evaluated locally."""

    __slots__ = ("primal", "inner")

    def __init__(self, primal, inner: GradientTracer | HessianTracer):
        self.primal = primal
        self.inner = inner

    @property
    def grad(self) -> IndexSet:
        return self.inner.grad

    @property
    def hess(self) -> IndexPairSet:
        return self.inner.hess

    @property
    def capacity(self) -> int:
        return self.inner.grad.capacity

    def _unary_op(self, name):
        return apply_local(REGISTRY[name], self)

    def _binary_op(self, name, other, reflected):
        if not (isinstance(other, LocalTracer) or is_constant(other)):
            return NotImplemented
        x, y = (other, self) if reflected else (self, other)
        return apply_local(REGISTRY[name], x, y)

    def __pow__(self, other):
        if is_constant(other) and other == 1:
            return self
        return self._binary_op("pow", other, False)

    # comparisons act on the primal value
    def __bool__(self):
        return bool(self.primal)

    def __lt__(self, other):
        return self.primal < _primal(other)

    def __le__(self, other):
        return self.primal <= _primal(other)

    def __gt__(self, other):
        return self.primal > _primal(other)

    def __ge__(self, other):
        return self.primal >= _primal(other)

    def __eq__(self, other):
        return self.primal == _primal(other)

    def __ne__(self, other):
        return self.primal != _primal(other)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"LocalTracer({self.primal!r}, {self.inner!r})"


def _primal(x):
    if isinstance(x, LocalTracer):
        return x.primal
    if is_global_tracer(x):
        raise MissingPrimalError("compare")
    return x


def apply_local(cls: OperatorClassification, x, y=None) -> LocalTracer:
    """Apply ``cls`` to local tracers (or constants), evaluating flags at the primals."""
    if cls.arity == 1:
        if y is not None:
            raise TypeError(f"operator {cls.name!r} has arity 1")
        flags = cls.local_flags(x.primal)
        return LocalTracer(cls.primal(x.primal), _inner_apply(flags, x.inner, None))
    if y is None:
        raise TypeError(f"operator {cls.name!r} has arity 2")
    if not isinstance(x, LocalTracer) and not isinstance(y, LocalTracer):
        raise TypeError("apply_local needs at least one LocalTracer argument")
    px, py = _primal(x), _primal(y)
    ix = x.inner if isinstance(x, LocalTracer) else None
    iy = y.inner if isinstance(y, LocalTracer) else None
    if ix is not None and iy is not None and type(ix) is not type(iy):
        raise TypeError("cannot combine gradient and Hessian local tracers")
    flags = cls.local_flags(px, py)
    return LocalTracer(cls.primal(px, py), _inner_apply(flags, ix, iy))


class GlobalCondition:
    """Outcome of comparing global tracers: unknown, since there is no primal.

    :func:`select` accepts it and merges both branches; anything that tries
    to turn it into a bool raises :class:`MissingPrimalError`.
    """

    __slots__ = ("operator",)

    def __init__(self, operator: str):
        self.operator = operator

    def __bool__(self):
        raise MissingPrimalError(self.operator)

    def __repr__(self):
        return f"GlobalCondition({self.operator!r})"


def _global_union(a, b):
    ref = a if is_global_tracer(a) else b
    if not is_global_tracer(a):
        a = ref._constant()
    if not is_global_tracer(b):
        b = ref._constant()
    if type(a) is not type(b):
        raise TypeError("select branches must be tracers of the same kind")
    if isinstance(a, HessianTracer):
        return HessianTracer(a.grad.union(b.grad), a.hess.union(b.hess))
    return GradientTracer(a.grad.union(b.grad))


def select(cond, a, b):
    """Branch-free conditional: ``a`` if ``cond`` else ``b``.

    With global tracers the condition is ignored and the patterns of both
    branches are merged, which is the conservative answer.  Otherwise the
    chosen branch is returned unchanged.
    """
    if isinstance(cond, GlobalCondition) or is_global_tracer(a) or is_global_tracer(b):
        return _global_union(a, b)
    return a if bool(cond) else b


_COMPARISONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "iszero": lambda a: a == 0,
    "isfinite": lambda a: bool(np.isfinite(a)),
}


def compare(op: str, *args) -> bool:
    """Evaluate a predicate on primal values.

    Raises :class:`MissingPrimalError` if any argument is a global tracer.
    """
    try:
        fn = _COMPARISONS[op]
    except KeyError:
        raise ValueError(f"unknown comparison {op!r}; choose from {sorted(_COMPARISONS)}") from None
    for a in args:
        if is_global_tracer(a):
            raise MissingPrimalError(op)
    return bool(fn(*(_primal(a) for a in args)))
