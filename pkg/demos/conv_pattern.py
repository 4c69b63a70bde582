"""Jacobian pattern of a small 2-D convolution layer, drawn as ASCII."""
import asdtrace as at
from asdtrace.cli import render

for batch in (1, 2):
    c = at.ConvProblem(batch=batch)
    p = at.jacobian_pattern_global(c, c.n)
    print(f"batch={batch}: shape={p.shape} nnz={p.nnz}")
print(render(at.jacobian_pattern_global(at.ConvProblem(batch=2), 600), max_rows=24, max_cols=72))
