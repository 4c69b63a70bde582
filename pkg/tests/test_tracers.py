import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asdtrace import ops
from asdtrace.operators import lookup
from asdtrace.pattern_store import BitIndexSet, IndexPairSet, SortedIndexSet
from asdtrace.tracers import (
    GlobalCondition,
    GradientTracer,
    HessianTracer,
    LocalTracer,
    MissingPrimalError,
    apply_local,
    compare,
    propagate_first_order,
    propagate_second_order,
    select,
)

N = 6


def s(*idx, n=N):
    return BitIndexSet.from_indices(idx, n)


def g(*idx):
    return GradientTracer(s(*idx))


def h(grad, pairs=()):
    return HessianTracer(s(*grad), IndexPairSet.from_pairs(pairs, N, backend=BitIndexSet))


# -- first order ---------------------------------------------------------

def test_propagate_first_order_examples():
    assert list(propagate_first_order(lookup("add"), s(0), s(1))) == [0, 1]
    assert list(propagate_first_order(lookup("floor"), s(0, 3))) == []
    assert list(propagate_first_order(lookup("exp"), s(2))) == [2]


def test_propagate_first_order_arity_and_capacity():
    with pytest.raises(TypeError):
        propagate_first_order(lookup("add"), s(0))
    with pytest.raises(TypeError):
        propagate_first_order(lookup("exp"), s(0), s(1))
    with pytest.raises(ValueError):
        propagate_first_order(lookup("add"), s(0), s(0, n=7))


def test_operator_overloads():
    x0, x1, x2 = g(0), g(1), g(2)
    assert list((x0 + x1).grad) == [0, 1]
    assert list((x1 * x2).grad) == [1, 2]
    assert list((2.0 * x0 - 1).grad) == [0]
    assert list((x0 / x2).grad) == [0, 2]
    assert list((1.0 / x2).grad) == [2]
    assert list(abs(-x1).grad) == [1]
    assert list((x0**2).grad) == [0]
    assert list((x0**x1).grad) == [0, 1]
    assert list((x0**0).grad) == []
    assert list(ops.floor(x0 + x1).grad) == []
    assert list(ops.maximum(x0, x2).grad) == [0, 2]


# -- second order --------------------------------------------------------

def test_propagate_second_order_examples():
    out = propagate_second_order(lookup("mul"), h([0]), h([1]))
    assert out.hess == {(0, 1), (1, 0)}
    out = propagate_second_order(lookup("add"), h([0], [(0, 0)]), h([1], [(1, 1)]))
    assert out.hess == {(0, 0), (1, 1)}
    out = propagate_second_order(lookup("exp"), h([0, 1]))
    assert out.hess == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_second_order_overloads():
    x = [h([j]) for j in range(3)]
    assert (x[0] / x[1]).hess == {(0, 1), (1, 0), (1, 1)}
    assert (x[0] * x[0]).hess == {(0, 0)}
    assert (x[0] * 3.0).hess.is_empty()
    assert ops.maximum(x[0], x[1]).hess.is_empty()
    assert ops.sin(x[0] + x[2]).hess == {(0, 0), (0, 2), (2, 0), (2, 2)}


# -- local tracers -------------------------------------------------------

def loc(v, *idx, kind=GradientTracer):
    return LocalTracer(v, kind(s(*idx)) if kind is GradientTracer else HessianTracer(s(*idx)))


def test_apply_local_examples():
    out = apply_local(lookup("max"), loc(3.0, 0), loc(1.0, 1))
    assert out.primal == 3.0 and list(out.grad) == [0]
    out = apply_local(lookup("max"), loc(2.0, 0), loc(2.0, 1))
    assert list(out.grad) == [0, 1]
    out = apply_local(lookup("floor"), loc(2.7, 3))
    assert out.primal == 2.0 and list(out.grad) == []


def test_local_arithmetic_and_comparisons():
    a, b = loc(2.0, 0), loc(3.0, 1)
    assert (a < b) is True and (a >= b) is False
    c = a * b + 1.0
    assert c.primal == 7.0 and list(c.grad) == [0, 1]
    assert list(ops.minimum(a, b).grad) == [0]
    assert list(ops.relu(loc(-1.0, 2)).grad) == []
    with pytest.raises(TypeError):
        float(a)  # would silently drop the pattern
    assert compare("<", a, b) is True
    assert compare("iszero", loc(0.0, 0)) is True
    assert compare("isfinite", loc(1.0, 0)) is True
    if a < b:  # value-dependent branching works locally
        branch = a
    assert list(branch.grad) == [0]


def test_local_hessian():
    x1 = LocalTracer(1.0, HessianTracer(s(0)))
    x2 = LocalTracer(3.0, HessianTracer(s(1)))
    y = ops.minimum(x1, x2) ** 2
    assert y.hess == {(0, 0)}
    y = x1 * x2
    assert y.hess == {(0, 1), (1, 0)}


# -- control flow --------------------------------------------------------

@pytest.mark.parametrize("op", [
    lambda a, b: a < b, lambda a, b: a <= b, lambda a, b: a > b, lambda a, b: a >= b,
    lambda a, b: a == b, lambda a, b: a != b, lambda a, b: bool(a), lambda a, b: float(a),
    lambda a, b: int(a),
])
def test_global_tracers_raise_missing_primal(op):
    with pytest.raises(MissingPrimalError):
        op(g(0), g(1))


def test_missing_primal_error_context():
    with pytest.raises(MissingPrimalError) as info:
        _ = g(0) < g(1)
    err = info.value
    assert err.operator == "<"
    assert "test_tracers.py" in err.call_site
    assert "'<'" in str(err)
    with pytest.raises(MissingPrimalError):
        compare("iszero", g(0))
    with pytest.raises(MissingPrimalError):
        ops.isfinite(g(0))


def test_select_semantics():
    assert list(select(GlobalCondition("<"), g(0), g(1)).grad) == [0, 1]
    assert list(select(True, g(0), g(1)).grad) == [0, 1]  # global ignores cond
    assert list(select(GlobalCondition("<"), g(2), g(2)).grad) == [2]
    assert list(select(True, loc(1.0, 0), loc(2.0, 1)).grad) == [0]
    assert list(select(False, loc(1.0, 0), loc(2.0, 1)).grad) == [1]
    hs = select(GlobalCondition(">"), h([0], [(0, 0)]), h([1]))
    assert list(hs.grad) == [0, 1] and hs.hess == {(0, 0)}
    with pytest.raises(MissingPrimalError):
        bool(GlobalCondition("<"))


def test_ops_where_on_arrays():
    x = np.array([g(0), g(1)], dtype=object)
    y = ops.where(ops.greater(x, 0.0), x * x, 0.0)
    assert [list(v.grad) for v in y] == [[0], [1]]


# -- properties on random programs ---------------------------------------

UNARY = ["sin", "cos", "tanh", "abs", "floor", "atan"]
BINARY = ["add", "sub", "mul", "max", "min"]

programs = st.lists(
    st.one_of(
        st.tuples(st.sampled_from(UNARY), st.integers(0, 30)),
        st.tuples(st.sampled_from(BINARY), st.integers(0, 30), st.integers(0, 30)),
        st.tuples(st.just("const_mul"), st.integers(0, 30), st.floats(-2, 2)),
    ),
    min_size=1, max_size=15,
)


def run(program, inputs):
    regs = list(inputs)
    for step in program:
        name = step[0]
        if name == "const_mul":
            regs.append(regs[step[1] % len(regs)] * step[2])
        elif len(step) == 2:
            regs.append(ops.apply(name, regs[step[1] % len(regs)]))
        else:
            regs.append(ops.apply(name, regs[step[1] % len(regs)], regs[step[2] % len(regs)]))
    return regs[-1]


def grad_of(v):
    if isinstance(v, (int, float)):
        return set()
    return set(v.grad)


def hess_of(v):
    if isinstance(v, (int, float)):
        return set()
    return set(v.hess)


xs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=4, max_size=4)


@given(programs, xs)
def test_local_subset_of_global(program, x):
    n = 4
    glob = run(program, [GradientTracer(s(j, n=n)) for j in range(n)])
    local = run(program, [LocalTracer(x[j], GradientTracer(s(j, n=n))) for j in range(n)])
    assert grad_of(local) <= grad_of(glob)
    hglob = run(program, [HessianTracer(s(j, n=n)) for j in range(n)])
    hloc = run(program, [LocalTracer(x[j], HessianTracer(s(j, n=n))) for j in range(n)])
    assert hess_of(hloc) <= hess_of(hglob)


@given(programs)
def test_second_order_grad_matches_first_order(program):
    n = 4
    a = run(program, [GradientTracer(s(j, n=n)) for j in range(n)])
    b = run(program, [HessianTracer(s(j, n=n)) for j in range(n)])
    assert grad_of(a) == grad_of(b)
    hb = hess_of(b)
    assert all((j, i) in hb for i, j in hb)


@given(programs, st.lists(st.sets(st.integers(0, 5)), min_size=4, max_size=4))
def test_monotonicity(program, extra):
    n = 6
    small = run(program, [GradientTracer(s(j, n=n)) for j in range(4)])
    big = run(program, [GradientTracer(s(j, *extra[j], n=n)) for j in range(4)])
    assert grad_of(small) <= grad_of(big)


def test_backend_independence_of_propagation():
    x = [GradientTracer(SortedIndexSet.singleton(j, 5)) for j in range(5)]
    y = ops.sin(x[0] * x[3]) + ops.floor(x[1]) / x[4]
    assert list(y.grad) == [0, 3, 4]
