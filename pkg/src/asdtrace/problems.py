"""Benchmark and test programs.

All programs are written with numpy array operations and :mod:`asdtrace.ops`
so they run unchanged on float arrays, dual numbers and tracers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ops
from .detection import SparsityPattern

__all__ = [
    "BrusselatorProblem",
    "brusselator_rhs",
    "brusselator_reference_pattern",
    "ConvProblem",
    "conv_forward",
    "conv_reference_pattern",
    "Problem",
    "test_function_suite",
    "hessian_function_suite",
    "get_problem",
    "PROBLEM_NAMES",
]


@dataclass(frozen=True)
class BrusselatorProblem:
    """2-D Brusselator reaction-diffusion right-hand side on a periodic grid.

    The state is ``u`` then ``v``, each an ``N x N`` grid flattened row-major,
    for a total length ``2 N**2``.
    """

    N: int
    A: float = 3.4
    B: float = 1.0
    alpha: float = 10.0

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("the periodic 5-point stencil needs N >= 3")

    @property
    def n(self) -> int:
        return 2 * self.N * self.N

    @property
    def dx(self) -> float:
        return 1.0 / (self.N - 1)

    def __call__(self, state):
        return brusselator_rhs(self, state)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.5, 2.0, size=self.n)


def _laplacian(w):
    return (np.roll(w, 1, axis=0) + np.roll(w, -1, axis=0)
            + np.roll(w, 1, axis=1) + np.roll(w, -1, axis=1) - 4.0 * w)


def brusselator_rhs(p: BrusselatorProblem, state):
    """``du = B + u^2 v - (A+1) u + a Lap(u)``, ``dv = A u - u^2 v + a Lap(v)``."""
    state = np.asarray(state)
    if state.shape != (p.n,):
        raise ValueError(f"state must have length {p.n}, got shape {state.shape}")
    N = p.N
    u = state[: N * N].reshape(N, N)
    v = state[N * N:].reshape(N, N)
    coef = p.alpha / p.dx**2
    u2v = u * u * v
    du = p.B + u2v - (p.A + 1.0) * u + coef * _laplacian(u)
    dv = p.A * u - u2v + coef * _laplacian(v)
    return np.concatenate([du.ravel(), dv.ravel()])


def brusselator_reference_pattern(N: int) -> SparsityPattern:
    """Jacobian structure written out from the stencil by hand."""
    nn = N * N
    rows = []
    for species in (0, 1):
        for i in range(N):
            for j in range(N):
                k = i * N + j
                stencil = [((i + di) % N) * N + (j + dj) % N
                           for di, dj in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))]
                own = species * nn
                other = (1 - species) * nn
                rows.append([own + s for s in stencil] + [other + k])
    return SparsityPattern((2 * nn, 2 * nn), rows)


@dataclass(frozen=True)
class ConvProblem:
    """Single convolution layer, valid padding, stride 1, fixed random weights.

    Inputs are laid out as ``(batch, height, width, in_channels)`` and
    outputs as ``(batch, out_height, out_width, out_channels)``, both
    flattened row-major.
    """

    height: int = 10
    width: int = 10
    in_channels: int = 3
    kernel: tuple[int, int] = (5, 5)
    out_channels: int = 1
    batch: int = 1
    seed: int = 0
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    bias: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kh, kw = self.kernel
        if kh > self.height or kw > self.width:
            raise ValueError("kernel larger than image")
        rng = np.random.default_rng(self.seed)
        # nonzero weights so every kernel tap is structurally present
        w = rng.uniform(0.5, 1.5, size=(kh, kw, self.in_channels, self.out_channels))
        w *= rng.choice([-1.0, 1.0], size=w.shape)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", rng.normal(size=self.out_channels))

    @property
    def input_shape(self):
        return (self.batch, self.height, self.width, self.in_channels)

    @property
    def output_shape(self):
        kh, kw = self.kernel
        return (self.batch, self.height - kh + 1, self.width - kw + 1, self.out_channels)

    @property
    def n(self) -> int:
        return int(np.prod(self.input_shape))

    @property
    def m(self) -> int:
        return int(np.prod(self.output_shape))

    def __call__(self, x):
        return conv_forward(self, x)

    def sample(self, rng):
        return rng.normal(size=self.n)


def conv_forward(p: ConvProblem, x):
    """Cross-correlation of every batch image with the layer's kernel."""
    x = np.asarray(x)
    if x.size != p.n:
        raise ValueError(f"input must have {p.n} entries, got {x.size}")
    x = x.reshape(p.input_shape)
    kh, kw = p.kernel
    b, oh, ow, co = p.output_shape
    out = np.empty(p.output_shape, dtype=x.dtype)
    for bi in range(b):
        for i in range(oh):
            for j in range(ow):
                patch = x[bi, i:i + kh, j:j + kw, :]
                out[bi, i, j, :] = np.tensordot(patch, p.weights, axes=3) + p.bias
    return out.ravel()


def conv_reference_pattern(p: ConvProblem) -> SparsityPattern:
    kh, kw = p.kernel
    b, oh, ow, co = p.output_shape
    idx = np.arange(p.n).reshape(p.input_shape)
    rows = []
    for bi in range(b):
        for i in range(oh):
            for j in range(ow):
                cols = idx[bi, i:i + kh, j:j + kw, :].ravel()
                rows.extend([cols] * co)
    return SparsityPattern((p.m, p.n), rows)


@dataclass
class Problem:
    """A traceable program with its hand-derived global patterns.

    ``jacobian`` and ``hessian`` are reference patterns (``None`` when not
    applicable).  ``sample(rng)`` draws a point where the program is defined
    and differentiable with probability one.
    """

    name: str
    f: Callable
    n: int
    m: int
    jacobian: SparsityPattern | None = None
    hessian: SparsityPattern | None = None
    sample: Callable | None = None
    smooth: bool = True

    @property
    def scalar(self) -> bool:
        return self.m == 1

    def draw(self, rng):
        if self.sample is not None:
            return self.sample(rng)
        return rng.normal(size=self.n)


def _diag(n):
    return SparsityPattern((n, n), [[i] for i in range(n)])


def _empty(m, n):
    return SparsityPattern((m, n), [[]] * m)


def _full_row(n):
    return SparsityPattern((1, n), [list(range(n))])


def _chain_hessian(n):
    return SparsityPattern(
        (n, n), [[j for j in (i - 1, i + 1) if 0 <= j < n] for i in range(n)]
    )


def identity(x):
    return x


def relu(x):
    return ops.relu(x)


def chain_product(x):
    return np.sum(x[:-1] * x[1:])


def sum_exp(x):
    return np.sum(ops.exp(x))


def half_sq(x):
    return 0.5 * np.sum(x**2)


def floor_all(x):
    return ops.floor(x)


def max_min_pairs(x):
    hi = ops.maximum(x[:-1], x[1:])
    lo = ops.minimum(x[:-1], x[1:])
    return np.where(np.arange(x.size - 1) % 2 == 0, hi, lo)


def division_chain(x):
    return x[:-1] / x[1:]


def piecewise(x):
    nxt = np.roll(x, -1)
    return ops.where(ops.greater(x, 0.0), x * x, ops.sin(nxt))


def separable_chain(x):
    """``sum(x_i^4 / 4 + cos(x_i)) + sum(x_i * x_{i+1}^2)``: tridiagonal Hessian."""
    return np.sum(x**4 / 4.0 + ops.cos(x)) + np.sum(x[:-1] * x[1:] ** 2)


def test_function_suite(n: int = 6) -> list[Problem]:
    """Small vector programs with hand-derived global Jacobian patterns."""
    if n < 3:
        raise ValueError("suite needs n >= 3")
    bidiag = SparsityPattern((n - 1, n), [[i, i + 1] for i in range(n - 1)])
    cyclic = SparsityPattern((n, n), [[i, (i + 1) % n] for i in range(n)])
    positive = lambda rng: rng.uniform(0.5, 2.0, size=n)  # noqa: E731
    return [
        Problem("identity", identity, n, n, jacobian=_diag(n)),
        Problem("constant", lambda x: np.full(2, 3.0), n, 2, jacobian=_empty(2, n),
                hessian=None),
        Problem("relu", relu, n, n, jacobian=_diag(n), smooth=False),
        Problem("floor", floor_all, n, n, jacobian=_empty(n, n), smooth=False,
                sample=lambda rng: rng.uniform(0.05, 0.95, size=n) + rng.integers(-3, 3, size=n)),
        Problem("maxmin", max_min_pairs, n, n - 1, jacobian=bidiag, smooth=False),
        Problem("divchain", division_chain, n, n - 1, jacobian=bidiag, sample=positive),
        Problem("piecewise", piecewise, n, n, jacobian=cyclic, smooth=False),
        Problem("chain", chain_product, n, 1, jacobian=_full_row(n), hessian=_chain_hessian(n)),
        Problem("sumexp", sum_exp, n, 1, jacobian=_full_row(n), hessian=_diag(n)),
        Problem("halfsq", half_sq, n, 1, jacobian=_full_row(n), hessian=_diag(n)),
        Problem("quartic", separable_chain, n, 1, jacobian=_full_row(n),
                hessian=SparsityPattern(
                    (n, n), [[j for j in (i - 1, i, i + 1) if 0 <= j < n] for i in range(n)])),
        Problem("maxpair", lambda x: ops.maximum(x[0], x[1]), n, 1,
                jacobian=SparsityPattern((1, n), [[0, 1]]), hessian=_empty(n, n), smooth=False),
    ]


def hessian_function_suite(n: int = 6) -> list[Problem]:
    """The scalar members of :func:`test_function_suite`."""
    return [p for p in test_function_suite(n) if p.scalar]


def _brusselator_problem(N):
    p = BrusselatorProblem(N)
    return Problem(f"brusselator", p, p.n, p.n, jacobian=brusselator_reference_pattern(N),
                   sample=p.sample)


def _conv_problem(size, batch=1):
    p = ConvProblem(height=size, width=size, batch=batch, kernel=(min(5, size),) * 2)
    return Problem("conv", p, p.n, p.m, jacobian=conv_reference_pattern(p), sample=p.sample)


PROBLEM_NAMES = ["brusselator", "conv"] + [p.name for p in test_function_suite(3)]


def get_problem(name: str, size: int, **options) -> Problem:
    """Look up a bundled problem by name.

    ``size`` is the grid side ``N`` for ``brusselator``, the image side for
    ``conv`` and the input dimension for the test-suite functions.
    """
    if name == "brusselator":
        return _brusselator_problem(size)
    if name == "conv":
        return _conv_problem(size, **options)
    for p in test_function_suite(size):
        if p.name == name:
            return p
    raise KeyError(f"unknown problem {name!r}; choose from {PROBLEM_NAMES}")
