"""Detect, color and differentiate the Brusselator Jacobian at several grid sizes."""
import time

import numpy as np

import asdtrace as at

print(f"{'N':>3} {'n':>6} {'nnz':>7} {'zeros%':>7} {'colors':>6} {'detect s':>9}")
for N in (6, 12, 24, 48):
    b = at.BrusselatorProblem(N)
    t0 = time.perf_counter()
    p = at.jacobian_pattern_global(b, b.n)
    dt = time.perf_counter() - t0
    c = at.greedy_distance2_coloring(p)
    print(f"{N:>3} {b.n:>6} {p.nnz:>7} {p.zeros_percent:>7.2f} {c.num_colors:>6} {dt:>9.3f}")

b = at.BrusselatorProblem(12)
x = b.sample(np.random.default_rng(0))
prep = at.prepare_jacobian(b, b.n)
J = at.sparse_jacobian(b, x, prep)
err = np.abs(J.toarray() - at.dense_jacobian(b, x)).max()
print(f"N=12: {prep.num_colors} JVPs instead of {b.n}, max |sparse - dense| = {err:.1e}")
