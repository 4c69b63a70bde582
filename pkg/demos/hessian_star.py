"""Hessian patterns, star coloring and symmetric decompression."""
import numpy as np

import asdtrace as at
from asdtrace import ops

n = 8
cases = {
    "sum(exp(x))": lambda x: np.sum(ops.exp(x)),
    "sum(x[i] x[i+1])": lambda x: np.sum(x[:-1] * x[1:]),
    "max(x0, x1)": lambda x: ops.maximum(x[0], x[1]),
    "arrowhead": lambda x: x[0] * np.sum(x[1:] ** 2),
}
x = np.random.default_rng(1).normal(size=n)
for name, f in cases.items():
    prep = at.prepare_hessian(f, n)
    H = at.sparse_hessian(f, x, prep).toarray()
    err = np.abs(H - at.dense_hessian(f, x)).max()
    print(f"{name:>18}: nnz={prep.pattern.nnz:>3} star colors={prep.num_colors} "
          f"HVPs={prep.num_products} max err={err:.1e}")
