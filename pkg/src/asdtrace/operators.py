"""Operator classification registry.

Every scalar operator is described once by an :class:`OperatorClassification`:
whether its first and second partial derivatives can be nonzero (globally,
and as predicates of the primal arguments for local tracing), the primal
function itself, and its numeric derivatives.  Tracers read the flags;
dual numbers read the derivatives.  Both therefore support exactly the same
operator set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Union

import numpy as np

__all__ = [
    "OperatorClassification",
    "Registry",
    "REGISTRY",
    "registry",
    "lookup",
    "register_operator",
]

Flag = Union[bool, Callable[..., bool]]

UNARY_SLOTS = ("d1", "d11")
BINARY_SLOTS = ("d1", "d2", "d11", "d22", "d12")


@dataclass(frozen=True)
class OperatorClassification:
    """First- and second-order classification of a scalar operator.

    Parameters
    ----------
    name : str
        Registry key, e.g. ``"exp"`` or ``"mul"``.
    arity : {1, 2}
    d1, d2, d11, d22, d12 : bool or None
        Global flags: can the partial derivative be nonzero anywhere?
        ``d2``, ``d22`` and ``d12`` must be ``None`` for unary operators.
    local : mapping, optional
        Per-slot overrides for local tracing.  A value is either a bool or a
        predicate called with the primal arguments.  Slots not listed fall
        back to the global flag.
    primal : callable, optional
        The real-valued operator.
    derivatives : callable, optional
        Returns ``(d1, d11)`` (unary) or ``(d1, d2, d11, d22, d12)``
        (binary) evaluated at the primal arguments.
    """

    name: str
    arity: int
    d1: bool
    d11: bool
    d2: bool | None = None
    d22: bool | None = None
    d12: bool | None = None
    local: Mapping[str, Flag] = field(default_factory=dict)
    primal: Callable | None = None
    derivatives: Callable | None = None
    _global: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError(f"{self.name}: arity must be 1 or 2, got {self.arity}")
        slots = self.slots
        for s in BINARY_SLOTS:
            value = getattr(self, s)
            if s in slots and value is None:
                raise ValueError(f"{self.name}: flag {s} is required for arity {self.arity}")
            if s not in slots and value is not None:
                raise ValueError(f"{self.name}: flag {s} is undefined for a unary operator")
        unknown = set(self.local) - set(slots)
        if unknown:
            raise ValueError(f"{self.name}: local overrides for undefined slots {sorted(unknown)}")
        object.__setattr__(self, "_global", tuple(bool(getattr(self, s)) for s in slots))

    @property
    def slots(self) -> tuple[str, ...]:
        return UNARY_SLOTS if self.arity == 1 else BINARY_SLOTS

    def global_flags(self) -> tuple[bool, ...]:
        return self._global

    def local_flags(self, *primals) -> tuple[bool, ...]:
        """Flags evaluated at concrete primal arguments."""
        out = []
        for s in self.slots:
            flag = self.local.get(s, getattr(self, s))
            out.append(bool(flag(*primals)) if callable(flag) else bool(flag))
        return tuple(out)

    def flags(self, primals=None) -> tuple[bool, ...]:
        return self.global_flags() if primals is None else self.local_flags(*primals)


class Registry:
    """Name -> :class:`OperatorClassification` mapping; rejects duplicates."""

    def __init__(self, entries=()):
        self._ops: dict[str, OperatorClassification] = {}
        for cls in entries:
            self.register(cls)

    def register(self, cls: OperatorClassification) -> OperatorClassification:
        if cls.name in self._ops:
            raise ValueError(f"operator {cls.name!r} is already registered")
        self._ops[cls.name] = cls
        return cls

    def __getitem__(self, name: str) -> OperatorClassification:
        try:
            return self._ops[name]
        except KeyError:
            raise KeyError(f"no operator named {name!r} is registered") from None

    def __contains__(self, name):
        return name in self._ops

    def __iter__(self) -> Iterator[OperatorClassification]:
        return iter(self._ops.values())

    def __len__(self):
        return len(self._ops)

    def names(self) -> list[str]:
        return list(self._ops)


_f = np.float64


def _pow_derivatives(a, b):
    a, b = _f(a), _f(b)
    p = np.power(a, b)
    log_a = np.log(a) if a > 0 else _f("nan")
    return (
        b * np.power(a, b - 1) if b != 0 else _f(0.0),
        p * log_a,
        b * (b - 1) * np.power(a, b - 2) if b not in (0, 1) else _f(0.0),
        p * log_a * log_a,
        np.power(a, b - 1) * (1 + b * log_a),
    )


def _div_derivatives(a, b):
    a, b = _f(a), _f(b)
    return (1 / b, -a / b**2, _f(0.0), 2 * a / b**3, -1 / b**2)


def _tan_derivatives(a):
    t = np.tan(a)
    return (1 + t * t, 2 * t * (1 + t * t))


def _tanh_derivatives(a):
    t = np.tanh(a)
    return (1 - t * t, -2 * t * (1 - t * t))


def _unary(name, fn, derivs, d1=True, d11=True, local=None):
    return OperatorClassification(
        name, 1, d1=d1, d11=d11, local=local or {}, primal=fn, derivatives=derivs
    )


def _binary(name, fn, derivs, d1, d2, d11, d22, d12, local=None):
    return OperatorClassification(
        name, 2, d1=d1, d2=d2, d11=d11, d22=d22, d12=d12,
        local=local or {}, primal=fn, derivatives=derivs,
    )


def _zero_unary(a):
    return (0.0, 0.0)


def _builtin_operators():
    # "1 a.e." entries are nonzero flags in both modes; only max/min use predicates
    return [
        _unary("neg", lambda a: -a, lambda a: (-1.0, 0.0), d11=False),
        _unary("abs", abs, lambda a: (1.0 if a >= 0 else -1.0, 0.0), d11=False),
        _unary("sqrt", np.sqrt, lambda a: (0.5 / np.sqrt(a), -0.25 * np.power(_f(a), -1.5))),
        _unary("exp", np.exp, lambda a: (np.exp(a), np.exp(a))),
        _unary("expm1", np.expm1, lambda a: (np.exp(a), np.exp(a))),
        _unary("log", np.log, lambda a: (1 / _f(a), -1 / _f(a) ** 2)),
        _unary("log1p", np.log1p, lambda a: (1 / (1 + _f(a)), -1 / (1 + _f(a)) ** 2)),
        _unary("sin", np.sin, lambda a: (np.cos(a), -np.sin(a))),
        _unary("cos", np.cos, lambda a: (-np.sin(a), -np.cos(a))),
        _unary("tan", np.tan, _tan_derivatives),
        _unary("tanh", np.tanh, _tanh_derivatives),
        _unary("sinh", np.sinh, lambda a: (np.cosh(a), np.sinh(a))),
        _unary("cosh", np.cosh, lambda a: (np.sinh(a), np.cosh(a))),
        _unary("atan", np.arctan, lambda a: (1 / (1 + _f(a) ** 2), -2 * a / (1 + _f(a) ** 2) ** 2)),
        _unary("sign", np.sign, _zero_unary, d1=False, d11=False),
        _unary("floor", np.floor, _zero_unary, d1=False, d11=False),
        _unary("ceil", np.ceil, _zero_unary, d1=False, d11=False),
        _unary("round", np.round, _zero_unary, d1=False, d11=False),
        _binary("add", lambda a, b: a + b, lambda a, b: (1.0, 1.0, 0.0, 0.0, 0.0),
                True, True, False, False, False),
        _binary("sub", lambda a, b: a - b, lambda a, b: (1.0, -1.0, 0.0, 0.0, 0.0),
                True, True, False, False, False),
        _binary("mul", lambda a, b: a * b, lambda a, b: (b, a, 0.0, 0.0, 1.0),
                True, True, False, False, True),
        _binary("div", lambda a, b: _f(a) / b, _div_derivatives,
                True, True, False, True, True),
        _binary("pow", lambda a, b: np.power(_f(a), b), _pow_derivatives,
                True, True, True, True, True,
                local={"d1": lambda a, b: b != 0, "d11": lambda a, b: b not in (0, 1)}),
        _binary("max", max, lambda a, b: (float(a >= b), float(b > a), 0.0, 0.0, 0.0),
                True, True, False, False, False,
                local={"d1": lambda a, b: a >= b, "d2": lambda a, b: b >= a}),
        _binary("min", min, lambda a, b: (float(a <= b), float(b < a), 0.0, 0.0, 0.0),
                True, True, False, False, False,
                local={"d1": lambda a, b: a <= b, "d2": lambda a, b: b <= a}),
    ]


REGISTRY = Registry(_builtin_operators())


def registry() -> list[OperatorClassification]:
    """All registered operator classifications."""
    return list(REGISTRY)


def lookup(name: str) -> OperatorClassification:
    return REGISTRY[name]


def register_operator(
    name: str,
    arity: int,
    *,
    d1: bool,
    d11: bool,
    d2: bool | None = None,
    d22: bool | None = None,
    d12: bool | None = None,
    local: Mapping[str, Flag] | None = None,
    primal: Callable | None = None,
    derivatives: Callable | None = None,
) -> OperatorClassification:
    """Add a user-defined operator; callable afterwards via ``ops.apply(name, ...)``.

    Examples
    --------
    >>> cls = register_operator(  # doctest: +SKIP
    ...     "softplus", 1, d1=True, d11=True,
    ...     primal=lambda a: math.log1p(math.exp(a)),
    ...     derivatives=lambda a: (1 / (1 + math.exp(-a)), ...),
    ... )
    """
    cls = OperatorClassification(
        name, arity, d1=d1, d11=d11, d2=d2, d22=d22, d12=d12,
        local=dict(local or {}), primal=primal, derivatives=derivatives,
    )
    return REGISTRY.register(cls)
