import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from asdtrace import forward_ad, ops, problems
from asdtrace.detection import SparsityPattern
from asdtrace.sparse_pipeline import (
    prepare_hessian,
    prepare_hessian_from_pattern,
    prepare_jacobian,
    prepare_jacobian_from_pattern,
    seed_matrix,
    sparse_hessian,
    sparse_jacobian,
)


def rel_err(A, B):
    A = A.toarray() if sp.issparse(A) else A
    return np.abs(A - B).max() / max(1.0, np.abs(B).max())


def test_identity_prep():
    prep = prepare_jacobian(lambda x: x, 4)
    assert prep.num_colors == 1
    assert np.array_equal(prep.seeds, np.ones((4, 1)))
    J = sparse_jacobian(lambda x: x, np.arange(4.0), prep)
    assert isinstance(J, sp.csc_matrix)
    assert np.array_equal(J.toarray(), np.eye(4))


def test_hand_coloring_example():
    prep = prepare_jacobian(lambda x: [x[0], x[0] + x[1]], 2)
    assert prep.num_colors == 2


def test_seeds_partition_inputs():
    b = problems.BrusselatorProblem(6)
    prep = prepare_jacobian(b, b.n)
    assert prep.num_colors <= 10
    S = prep.seeds
    assert set(np.unique(S)) <= {0.0, 1.0}
    assert np.array_equal(S.sum(axis=1), np.ones(b.n))
    assert np.array_equal(seed_matrix(prep.coloring), S)


@pytest.mark.parametrize("N", [6, 24])
def test_brusselator_sparse_matches_dense(N):
    b = problems.BrusselatorProblem(N)
    prep = prepare_jacobian(b, b.n)
    x = b.sample(np.random.default_rng(N))
    J = sparse_jacobian(b, x, prep)
    assert J.nnz == prep.pattern.nnz
    if N == 6:
        assert rel_err(J, forward_ad.dense_jacobian(b, x)) <= 1e-10
    else:
        # compare a few dense columns to keep the test quick
        cols = np.arange(0, b.n, 97)
        D = forward_ad.jvp_batch(b, x, np.eye(b.n)[:, cols])
        assert rel_err(J[:, cols], D) <= 1e-10


def test_product_count(monkeypatch):
    b = problems.BrusselatorProblem(6)
    prep = prepare_jacobian(b, b.n)
    seen = []
    real = forward_ad.jvp_batch

    def spy(f, x, S, chunk_size=forward_ad.DEFAULT_CHUNK_SIZE):
        seen.append(S.shape[1])
        return real(f, x, S, chunk_size)

    monkeypatch.setattr(forward_ad, "jvp_batch", spy)
    sparse_jacobian(b, b.sample(np.random.default_rng(0)), prep)
    assert seen == [prep.num_colors]


def test_prep_reuse_matches_fresh_preps():
    b = problems.BrusselatorProblem(5)
    prep = prepare_jacobian(b, b.n)
    rng = np.random.default_rng(3)
    for _ in range(3):
        x = b.sample(rng)
        a = sparse_jacobian(b, x, prep)
        c = sparse_jacobian(b, x, prepare_jacobian(b, b.n))
        assert (a != c).nnz == 0


def test_unprepared_and_local_prep():
    f = problems.relu
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(sparse_jacobian(f, x).toarray(), np.diag([1.0, 0.0, 1.0]))
    prep = prepare_jacobian(f, mode="local", x=x)
    assert prep.mode == "local" and np.array_equal(prep.anchor, x)
    assert prep.pattern.nnz == 2


def test_dimension_checks():
    prep = prepare_jacobian(lambda x: x, 3)
    with pytest.raises(ValueError):
        sparse_jacobian(lambda x: x, np.ones(4), prep)
    with pytest.raises(ValueError):
        sparse_jacobian(lambda x: x[:2], np.ones(3), prep)
    with pytest.raises(ValueError):
        prep.decompress(np.ones((3, 2)))


def test_hessian_examples():
    half = lambda x: 0.5 * np.sum(x * x)  # noqa: E731
    prep = prepare_hessian(half, 5)
    assert prep.num_colors == 1
    assert np.array_equal(sparse_hessian(half, np.ones(5), prep).toarray(), np.eye(5))
    chain = problems.chain_product
    prep = prepare_hessian(chain, 6)
    assert prep.num_colors <= 3
    H = sparse_hessian(chain, np.random.default_rng(0).normal(size=6), prep).toarray()
    assert np.array_equal(H, np.diag(np.ones(5), 1) + np.diag(np.ones(5), -1))
    mx = lambda x: ops.maximum(x[0], x[1])  # noqa: E731
    prep = prepare_hessian(mx, 2)
    assert prep.pattern.nnz == 0 and prep.num_products == 0
    assert sparse_hessian(mx, np.array([1.0, 2.0]), prep).nnz == 0


def test_empty_jacobian_needs_no_products():
    prep = prepare_jacobian(problems.floor_all, 4)
    assert prep.num_products == 0
    J = sparse_jacobian(problems.floor_all, np.full(4, 0.5), prep)
    assert J.shape == (4, 4) and J.nnz == 0


@pytest.mark.parametrize("prob", problems.test_function_suite(6), ids=lambda p: p.name)
def test_oracle_equivalence_suite(prob):
    rng = np.random.default_rng(11)
    jprep = prepare_jacobian(prob.f, prob.n)
    hprep = prepare_hessian(prob.f, prob.n) if prob.scalar else None
    for _ in range(10):
        x = prob.draw(rng)
        assert rel_err(sparse_jacobian(prob.f, x, jprep), forward_ad.dense_jacobian(prob.f, x)) <= 1e-10
        if hprep is not None:
            H = sparse_hessian(prob.f, x, hprep)
            assert rel_err(H, forward_ad.dense_hessian(prob.f, x)) <= 1e-8
            assert (H != H.T).nnz == 0


def random_symmetric_support(n, edges):
    rows = [{i} for i in range(n)]
    for a, b in edges:
        a, b = a % n, b % n
        rows[a].add(b)
        rows[b].add(a)
    return SparsityPattern((n, n), [sorted(r) for r in rows])


@given(st.integers(1, 10), st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=20),
       st.integers(0, 2**32 - 1))
def test_symmetric_round_trip_bit_exact(n, edges, seed):
    p = random_symmetric_support(n, edges)
    prep = prepare_hessian_from_pattern(p)
    rng = np.random.default_rng(seed)
    A = np.where(p.to_dense(), rng.normal(size=(n, n)), 0.0)
    A = np.triu(A) + np.triu(A, 1).T
    back = prep.decompress(prep.compress(A)).toarray()
    assert np.array_equal(back, A)


@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_column_round_trip_bit_exact(m, n, seed):
    rng = np.random.default_rng(seed)
    mask = rng.random((m, n)) < 0.3
    p = SparsityPattern.from_dense(mask)
    prep = prepare_jacobian_from_pattern(p)
    A = np.where(mask, rng.normal(size=(m, n)), 0.0)
    assert np.array_equal(prep.decompress(prep.compress(A)).toarray(), A)


def test_output_sorted_by_column_then_row():
    p = SparsityPattern((3, 3), [[2], [0, 2], [1]])
    prep = prepare_jacobian_from_pattern(p)
    J = prep.decompress(prep.compress(np.where(p.to_dense(), 1.0, 0.0)))
    assert J.has_sorted_indices
    coo = J.tocoo()
    assert list(zip(coo.col.tolist(), coo.row.tolist())) == [(0, 1), (1, 2), (2, 0), (2, 1)]
