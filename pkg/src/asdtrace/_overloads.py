"""Python operator protocol mapped onto registry operator names."""
from __future__ import annotations

import numbers

import numpy as np


def is_constant(x) -> bool:
    """Plain real numbers enter traced programs as constants."""
    return isinstance(x, (numbers.Real, np.bool_)) and not isinstance(x, ScalarOverloads)


class ScalarOverloads:
    """Mixin routing arithmetic dunders to ``_unary_op`` / ``_binary_op``.

    Subclasses implement both hooks.  ``_binary_op`` returns
    ``NotImplemented`` for operands it does not understand so that numpy
    arrays can take over broadcasting.
    """

    __slots__ = ()

    def _unary_op(self, name):
        raise NotImplementedError

    def _binary_op(self, name, other, reflected):
        raise NotImplementedError

    def __add__(self, other):
        return self._binary_op("add", other, False)

    def __radd__(self, other):
        return self._binary_op("add", other, True)

    def __sub__(self, other):
        return self._binary_op("sub", other, False)

    def __rsub__(self, other):
        return self._binary_op("sub", other, True)

    def __mul__(self, other):
        return self._binary_op("mul", other, False)

    def __rmul__(self, other):
        return self._binary_op("mul", other, True)

    def __truediv__(self, other):
        return self._binary_op("div", other, False)

    def __rtruediv__(self, other):
        return self._binary_op("div", other, True)

    def __pow__(self, other):
        return self._binary_op("pow", other, False)

    def __rpow__(self, other):
        return self._binary_op("pow", other, True)

    def __neg__(self):
        return self._unary_op("neg")

    def __pos__(self):
        return self

    def __abs__(self):
        return self._unary_op("abs")

    def __floor__(self):
        return self._unary_op("floor")

    def __ceil__(self):
        return self._unary_op("ceil")

    def __round__(self, ndigits=None):
        if ndigits is not None:
            raise TypeError("rounding to a number of digits is not supported on traced numbers")
        return self._unary_op("round")

    # numpy calls these methods when applying ufuncs to object arrays
    def exp(self):
        return self._unary_op("exp")

    def expm1(self):
        return self._unary_op("expm1")

    def log(self):
        return self._unary_op("log")

    def log1p(self):
        return self._unary_op("log1p")

    def sqrt(self):
        return self._unary_op("sqrt")

    def sin(self):
        return self._unary_op("sin")

    def cos(self):
        return self._unary_op("cos")

    def tan(self):
        return self._unary_op("tan")

    def tanh(self):
        return self._unary_op("tanh")

    def sinh(self):
        return self._unary_op("sinh")

    def cosh(self):
        return self._unary_op("cosh")

    def arctan(self):
        return self._unary_op("atan")
