import numpy as np
import pytest
import scipy.sparse as sp

from asdtrace import io, problems
from asdtrace.detection import SparsityPattern, jacobian_pattern_global


def test_pattern_file_format(tmp_path):
    p = SparsityPattern((2, 3), [[0, 2], [1]])
    path = tmp_path / "p.mtx"
    io.write_pattern(path, p)
    lines = path.read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate pattern general"
    assert lines[1:] == ["2 3 3", "1 1", "1 3", "2 2"]
    assert io.read_pattern(path) == p


def test_empty_and_brusselator_round_trip(tmp_path):
    empty = SparsityPattern((3, 3), [[], [], []])
    io.write_pattern(tmp_path / "e.mtx", empty)
    assert (tmp_path / "e.mtx").read_text().startswith(io.PATTERN_HEADER)
    assert io.read_pattern(tmp_path / "e.mtx") == empty
    b = problems.BrusselatorProblem(6)
    p = jacobian_pattern_global(b, b.n)
    io.write_pattern(tmp_path / "b.mtx", p)
    assert io.read_pattern(tmp_path / "b.mtx") == p


def test_matrix_round_trip_keeps_explicit_zeros(tmp_path):
    A = sp.csc_matrix((np.array([1.5, 0.0, -2.25]), ([0, 1, 2], [0, 2, 1])), shape=(3, 3))
    io.write_matrix(tmp_path / "a.mtx", A)
    text = (tmp_path / "a.mtx").read_text()
    assert text.startswith("%%MatrixMarket matrix coordinate real general")
    back = io.read_matrix(tmp_path / "a.mtx")
    assert back.nnz == 3 and np.array_equal(back.toarray(), A.toarray())


def test_malformed_files(tmp_path):
    bad = tmp_path / "bad.mtx"
    bad.write_text("not a matrix market file\n")
    with pytest.raises(ValueError):
        io.read_pattern(bad)
    with pytest.raises(ValueError):
        io.read_matrix(bad)
