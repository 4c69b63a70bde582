"""Matrix Market and CSV files.

Files use 1-based indices; everything in memory is 0-based.
"""
from __future__ import annotations

import scipy.io
import scipy.sparse as sp

from .coloring import Coloring, read_coloring_csv, write_coloring_csv
from .detection import SparsityPattern

__all__ = [
    "PATTERN_HEADER",
    "write_pattern",
    "read_pattern",
    "write_matrix",
    "read_matrix",
    "write_coloring_csv",
    "read_coloring_csv",
    "Coloring",
]

PATTERN_HEADER = "%%MatrixMarket matrix coordinate pattern general"


def write_pattern(path, pattern: SparsityPattern) -> None:
    """Coordinate pattern file, one ``i j`` pair per line in row-major order."""
    rows, cols = pattern.to_coo()
    with open(path, "w") as fh:
        fh.write(PATTERN_HEADER + "\n")
        fh.write(f"{pattern.nrows} {pattern.ncols} {rows.size}\n")
        for i, j in zip(rows.tolist(), cols.tolist()):
            fh.write(f"{i + 1} {j + 1}\n")


def read_pattern(path) -> SparsityPattern:
    """Structure of any coordinate Matrix Market file (values are ignored).

    Raises
    ------
    ValueError
        If the file cannot be parsed as a coordinate Matrix Market file.
    """
    try:
        A = scipy.io.mmread(path)
    except Exception as exc:  # scipy raises assorted types on bad input
        raise ValueError(f"{path}: not a readable Matrix Market file ({exc})") from exc
    if not sp.issparse(A):
        raise ValueError(f"{path}: expected coordinate format, got a dense array")
    A = sp.coo_matrix(A)
    return SparsityPattern.from_coo(A.row, A.col, A.shape)


def write_matrix(path, A) -> None:
    """Coordinate real general file; explicitly stored zeros are kept."""
    scipy.io.mmwrite(path, sp.coo_matrix(A, dtype=float), field="real", symmetry="general")


def read_matrix(path) -> sp.csc_matrix:
    try:
        A = scipy.io.mmread(path)
    except Exception as exc:
        raise ValueError(f"{path}: not a readable Matrix Market file ({exc})") from exc
    return sp.csc_matrix(A, dtype=float)
