import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asdtrace import ops, problems
from asdtrace.forward_ad import (
    Dual,
    SecondOrderDual,
    dense_hessian,
    dense_jacobian,
    gradient,
    hvp_batch,
    jvp_batch,
)
from asdtrace.operators import lookup, registry


def fd_jacobian(f, x, h=1e-6):
    cols = []
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = h
        cols.append((np.asarray(f(x + e), dtype=float).ravel()
                     - np.asarray(f(x - e), dtype=float).ravel()) / (2 * h))
    return np.column_stack(cols)


def test_jvp_examples():
    assert np.array_equal(jvp_batch(lambda x: x, np.ones(3), np.eye(3)), np.eye(3))
    J = jvp_batch(lambda x: [x[0] * x[1]], np.array([2.0, 3.0]), np.eye(2))
    assert np.array_equal(J, [[3.0, 2.0]])


def test_hvp_examples():
    S = np.random.default_rng(0).normal(size=(4, 3))
    assert np.allclose(hvp_batch(lambda x: 0.5 * np.sum(x * x), np.ones(4), S), S)
    H = hvp_batch(lambda x: x[0] * x[1], np.array([1.5, -2.0]), np.eye(2))
    assert np.array_equal(H, [[0.0, 1.0], [1.0, 0.0]])


def test_chain_hessian_values():
    H = dense_hessian(lambda x: np.sum(x[:-1] * x[1:]), np.arange(5.0))
    expected = np.diag(np.ones(4), 1) + np.diag(np.ones(4), -1)
    assert np.array_equal(H, expected)


def test_dense_identity_and_brusselator():
    assert np.array_equal(dense_jacobian(lambda x: x, np.zeros(4)), np.eye(4))
    b = problems.BrusselatorProblem(6)
    J = dense_jacobian(b, b.sample(np.random.default_rng(0)))
    assert J.shape == (72, 72) and np.count_nonzero(np.abs(J) > 1e-12) == 432


def test_dimension_errors():
    with pytest.raises(ValueError):
        jvp_batch(lambda x: x, np.ones(3), np.ones((2, 2)))
    with pytest.raises(ValueError):
        hvp_batch(lambda x: x, np.ones(2), np.eye(2))
    with pytest.raises(ValueError):
        jvp_batch(lambda x: x, np.ones((2, 2)), np.eye(2))
    with pytest.raises(ValueError):
        jvp_batch(lambda x: x, np.ones(2), np.eye(2), chunk_size=0)
    with pytest.raises(ValueError):
        gradient(lambda x: x, np.ones(2))
    with pytest.raises(ValueError):
        Dual(1.0, np.ones(2)) + Dual(1.0, np.ones(3))


@pytest.mark.parametrize("chunk", [1, 3, 16, 100])
def test_chunking_does_not_change_results(chunk):
    b = problems.BrusselatorProblem(3)
    x = b.sample(np.random.default_rng(2))
    S = np.random.default_rng(3).normal(size=(b.n, 7))
    assert np.allclose(jvp_batch(b, x, S, chunk), jvp_batch(b, x, S, 16), rtol=0, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_jvp_linearity(seed, alpha):
    rng = np.random.default_rng(seed)
    b = problems.BrusselatorProblem(3)
    x = b.sample(rng)
    u, v = rng.normal(size=b.n), rng.normal(size=b.n)
    both = jvp_batch(b, x, np.column_stack([u, v]))
    assert np.allclose(both[:, 0], jvp_batch(b, x, u)[:, 0])
    assert np.allclose(both[:, 1], jvp_batch(b, x, v)[:, 0])
    assert np.allclose(jvp_batch(b, x, alpha * u)[:, 0], alpha * both[:, 0], atol=1e-9)


def test_quartic_hvp_matches_fd_gradient():
    f = problems.separable_chain
    x = np.random.default_rng(4).normal(size=6)
    S = np.random.default_rng(5).normal(size=(6, 3))
    fd = fd_jacobian(lambda z: gradient(f, z), x, h=1e-6)
    assert np.allclose(hvp_batch(f, x, S), fd @ S, rtol=1e-5, atol=1e-5)


SMOOTH = [p for p in problems.test_function_suite(6) if p.smooth]


@pytest.mark.parametrize("prob", SMOOTH + [problems.get_problem("brusselator", 4),
                                           problems.get_problem("conv", 6)],
                         ids=lambda p: p.name)
def test_jacobian_matches_finite_differences(prob):
    rng = np.random.default_rng(8)
    for _ in range(5):
        x = prob.draw(rng)
        J = dense_jacobian(prob.f, x)
        fd = fd_jacobian(prob.f, x)
        scale = max(1.0, np.abs(J).max())
        assert np.abs(J - fd).max() <= 1e-5 * scale


@pytest.mark.parametrize("prob", [p for p in SMOOTH if p.scalar], ids=lambda p: p.name)
def test_hessian_symmetric_and_matches_fd(prob):
    rng = np.random.default_rng(9)
    for _ in range(5):
        x = prob.draw(rng)
        H = dense_hessian(prob.f, x)
        assert np.abs(H - H.T).max() <= 1e-12
        fd = fd_jacobian(lambda z: gradient(prob.f, z), x)
        assert np.abs(H - fd).max() <= 1e-5 * max(1.0, np.abs(H).max())


POINTS = {"sqrt": 1.3, "log": 1.3, "log1p": 0.4, "tan": 0.3, "floor": 0.4, "ceil": 0.4,
          "round": 0.3, "sign": 0.7, "abs": -0.8}


@pytest.mark.parametrize("name", [c.name for c in registry() if c.arity == 1
                                  and not c.name.endswith("_test")])
def test_unary_duals_match_fd(name):
    a = POINTS.get(name, 0.7)
    prim = lookup(name).primal
    d = ops.apply(name, Dual(a, np.array([1.0])))
    h = 1e-5
    assert d.partials[0] == pytest.approx((prim(a + h) - prim(a - h)) / (2 * h), abs=1e-6)
    s = ops.apply(name, SecondOrderDual(a, np.array([1.0]), np.array([1.0]), np.zeros((1, 1))))
    fd2 = (prim(a + h) - 2 * prim(a) + prim(a - h)) / h**2
    assert s.second[0, 0] == pytest.approx(fd2, abs=1e-3)


@pytest.mark.parametrize("name", ["add", "sub", "mul", "div", "pow", "max", "min"])
def test_binary_duals_match_fd(name):
    x = np.array([1.3, 0.6])
    f = lambda z: [ops.apply(name, z[0], z[1])]  # noqa: E731
    assert np.allclose(dense_jacobian(f, x), fd_jacobian(f, x), atol=1e-6)
    g = lambda z: ops.apply(name, z[0], z[1])  # noqa: E731
    H = dense_hessian(g, x)
    fd = fd_jacobian(lambda z: gradient(g, z), x)
    assert np.allclose(H, fd, atol=1e-5)
    # constant operands on either side, away from ties
    xc = np.array([0.9])
    for c in (lambda z: ops.apply(name, z[0], 0.6), lambda z: ops.apply(name, 1.3, z[0])):
        assert np.allclose(dense_jacobian(lambda z: [c(z)], xc),
                           fd_jacobian(lambda z: [c(z)], xc), atol=1e-6)
        assert np.allclose(dense_hessian(c, xc), fd_jacobian(lambda z: gradient(c, z), xc),
                           atol=1e-5)


def test_second_order_dual_stays_symmetric():
    x = np.random.default_rng(0).normal(size=4)
    H = dense_hessian(lambda z: ops.exp(z[0] * z[1]) / (1 + z[2] ** 2) + ops.sin(z[3] * z[0]), x)
    assert np.abs(H - H.T).max() <= 1e-12


def test_dual_comparisons_follow_values():
    a, b = Dual(1.0, np.zeros(1)), Dual(2.0, np.zeros(1))
    assert a < b and b >= a and a != b and bool(b)
