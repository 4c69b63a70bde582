"""Generic math functions for programs that run on floats, duals and tracers.

Every function accepts Python/numpy reals, float arrays, traced numbers
(tracers or dual numbers) and object arrays of traced numbers.  Float
inputs go straight to numpy; traced inputs go through the operator registry.

>>> import numpy as np
>>> from asdtrace import ops
>>> ops.relu(np.array([-1.0, 2.0]))
array([0., 2.])
"""
from __future__ import annotations

import numpy as np

from ._overloads import ScalarOverloads
from .operators import REGISTRY
from .tracers import GlobalCondition, MissingPrimalError, compare, is_global_tracer
from .tracers import select as _select_scalar

__all__ = [
    "apply", "exp", "expm1", "log", "log1p", "sqrt", "sin", "cos", "tan", "tanh",
    "sinh", "cosh", "arctan", "abs", "sign", "floor", "ceil", "round",
    "maximum", "minimum", "power", "relu", "where", "select",
    "less", "less_equal", "greater", "greater_equal", "equal", "not_equal",
    "iszero", "isfinite",
]

_NUMPY = {
    "neg": np.negative, "abs": np.abs, "sqrt": np.sqrt, "exp": np.exp, "expm1": np.expm1,
    "log": np.log, "log1p": np.log1p, "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "tanh": np.tanh, "sinh": np.sinh, "cosh": np.cosh, "atan": np.arctan,
    "sign": np.sign, "floor": np.floor, "ceil": np.ceil, "round": np.round,
    "add": np.add, "sub": np.subtract, "mul": np.multiply, "div": np.true_divide,
    "pow": np.power, "max": np.maximum, "min": np.minimum,
}


def _is_traced(x) -> bool:
    return isinstance(x, ScalarOverloads)


def _is_object_array(x) -> bool:
    return isinstance(x, np.ndarray) and x.dtype == object


def _scalar_apply(name, args):
    if len(args) == 1:
        (a,) = args
        if _is_traced(a):
            return a._unary_op(name)
        return REGISTRY[name].primal(a)
    a, b = args
    if _is_traced(a):
        out = a._binary_op(name, b, False)
        if out is not NotImplemented:
            return out
    if _is_traced(b):
        out = b._binary_op(name, a, True)
        if out is not NotImplemented:
            return out
        raise TypeError(f"unsupported operands for {name!r}: {type(a).__name__}, {type(b).__name__}")
    return REGISTRY[name].primal(a, b)


def apply(name: str, *args):
    """Apply the registered operator ``name`` elementwise."""
    cls = REGISTRY[name]
    if len(args) != cls.arity:
        raise TypeError(f"operator {name!r} takes {cls.arity} argument(s), got {len(args)}")
    if any(_is_object_array(a) for a in args):
        ufunc = np.frompyfunc(lambda *a: _scalar_apply(name, a), cls.arity, 1)
        return ufunc(*args)
    if any(_is_traced(a) for a in args):
        return _scalar_apply(name, args)
    if name in _NUMPY:
        return _NUMPY[name](*args)
    return np.vectorize(cls.primal, otypes=[float])(*args)


def _unary(name):
    def fn(x):
        return apply(name, x)

    fn.__name__ = name
    fn.__doc__ = f"Elementwise ``{name}`` on reals, traced numbers, or arrays of either."
    return fn


exp = _unary("exp")
expm1 = _unary("expm1")
log = _unary("log")
log1p = _unary("log1p")
sqrt = _unary("sqrt")
sin = _unary("sin")
cos = _unary("cos")
tan = _unary("tan")
tanh = _unary("tanh")
sinh = _unary("sinh")
cosh = _unary("cosh")
arctan = _unary("atan")
abs = _unary("abs")
sign = _unary("sign")
floor = _unary("floor")
ceil = _unary("ceil")
round = _unary("round")


def maximum(a, b):
    return apply("max", a, b)


def minimum(a, b):
    return apply("min", a, b)


def power(a, b):
    if _is_traced(a) and not _is_object_array(b):
        return a**b
    return apply("pow", a, b)


def relu(x):
    """``max(x, 0)``; global tracers keep the pattern of ``x``."""
    return maximum(x, 0.0)


def _comparison(op, numpy_fn):
    def scalar(a, b):
        if is_global_tracer(a) or is_global_tracer(b):
            return GlobalCondition(op)
        return compare(op, a, b)

    vectorized = np.frompyfunc(scalar, 2, 1)

    def fn(a, b):
        if _is_object_array(a) or _is_object_array(b):
            return vectorized(a, b)
        if _is_traced(a) or _is_traced(b):
            return scalar(a, b)
        return numpy_fn(a, b)

    fn.__name__ = numpy_fn.__name__
    fn.__doc__ = (
        f"``a {op} b``.  Returns a :class:`GlobalCondition` for global tracers, "
        "which only :func:`where` / :func:`select` accept."
    )
    return fn


less = _comparison("<", np.less)
less_equal = _comparison("<=", np.less_equal)
greater = _comparison(">", np.greater)
greater_equal = _comparison(">=", np.greater_equal)
equal = _comparison("==", np.equal)
not_equal = _comparison("!=", np.not_equal)

_where_obj = np.frompyfunc(_select_scalar, 3, 1)


def where(cond, a, b):
    """Branch-free elementwise select.

    Global tracers receive the union of both branch patterns; everything
    else gets the chosen branch.
    """
    if any(_is_object_array(v) for v in (cond, a, b)):
        return _where_obj(cond, a, b)
    if isinstance(cond, GlobalCondition) or any(_is_traced(v) for v in (a, b)):
        return _select_scalar(cond, a, b)
    return np.where(cond, a, b)


select = where


def iszero(x):
    if _is_object_array(x):
        return np.array([iszero(v) for v in x.ravel()], dtype=bool).reshape(x.shape)
    if _is_traced(x):
        return compare("iszero", x)
    return np.equal(x, 0)


def isfinite(x):
    if _is_object_array(x):
        return np.array([isfinite(v) for v in x.ravel()], dtype=bool).reshape(x.shape)
    if is_global_tracer(x):
        raise MissingPrimalError("isfinite")
    if _is_traced(x):
        return bool(np.isfinite(x.primal if hasattr(x, "primal") else x.value))
    return np.isfinite(x)
