"""Set unions needed to trace A @ B, elementwise versus the row/column shortcut."""
import numpy as np

import asdtrace as at
from asdtrace.pattern_store import BitIndexSet, union_counter


def tracers(shape, offset, cap):
    A = np.empty(shape, dtype=object)
    for k, ij in enumerate(np.ndindex(*shape)):
        A[ij] = at.GradientTracer(BitIndexSet.from_indices([(offset + k) % cap], cap))
    return A


print(f"{'n=p=m':>6} {'elementwise':>12} {'shortcut':>9}")
for k in (2, 4, 8, 16):
    A, B = tracers((k, k), 0, 2 * k * k), tracers((k, k), k * k, 2 * k * k)
    with union_counter() as slow:
        A @ B
    with union_counter() as fast:
        at.tracer_matmul(A, B)
    print(f"{k:>6} {slow.count:>12} {fast.count:>9}")
