"""Global patterns hold for every input; local patterns hold at one point."""
import numpy as np

import asdtrace as at
from asdtrace import ops

x = np.array([1.5, -0.5, 2.0, -3.0])
print("relu global:", [r.tolist() for r in at.jacobian_pattern_global(ops.relu, 4).rows])
print("relu local: ", [r.tolist() for r in at.jacobian_pattern_local(ops.relu, x).rows])
print("floor global nnz:", at.jacobian_pattern_global(ops.floor, 4).nnz)


def branchy(v):
    return [v[0] if v[0] < v[1] else v[1] * v[2]]


try:
    at.jacobian_pattern_global(branchy, 3)
except at.MissingPrimalError as exc:
    print("global mode:", exc)
print("local mode at (3, 1, 2):",
      at.jacobian_pattern_local(branchy, np.array([3.0, 1.0, 2.0])).rows[0].tolist())
print("branch-free where, global:",
      at.jacobian_pattern_global(lambda v: [ops.where(ops.less(v[0], v[1]), v[0], v[1] * v[2])], 3)
      .rows[0].tolist())
