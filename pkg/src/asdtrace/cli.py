"""``asdtrace`` command-line interface.

Exit status: 0 on success, 1 for usage errors, 2 when a computation or
input file fails.
"""
from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time

import numpy as np
import scipy.sparse as sp

from . import forward_ad, io
from .coloring import (
    Coloring,
    greedy_distance2_coloring,
    greedy_star_coloring,
    verify_star,
    verify_structural_orthogonality,
)
from .detection import SparsityPattern, hessian_pattern, jacobian_pattern
from .problems import PROBLEM_NAMES, get_problem
from .sparse_pipeline import prepare_hessian, prepare_jacobian, sparse_hessian, sparse_jacobian
from .tracers import MissingPrimalError

EXIT_USAGE = 1
EXIT_FAILURE = 2

BENCH_COLUMNS = ["size", "detect_s", "color_s", "prepared_sparse_s",
                 "unprepared_sparse_s", "dense_s", "colors", "nnz"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def stats_line(p: SparsityPattern) -> str:
    return f"rows={p.nrows} cols={p.ncols} nnz={p.nnz} zeros={p.zeros_percent:.4g}%"


def _problem(args):
    options = {"batch": args.batch} if args.problem == "conv" else {}
    try:
        return get_problem(args.problem, args.n, **options)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _point(args, prob):
    """Evaluation point from ``--input`` (whitespace separated) or the seeded RNG."""
    if args.input:
        x = np.loadtxt(args.input, dtype=float, ndmin=1).ravel()
        if x.size != prob.n:
            raise ValueError(f"{args.input}: expected {prob.n} values, got {x.size}")
        return x
    return np.asarray(prob.draw(np.random.default_rng(args.seed)), dtype=float)


def _require_scalar(prob, what):
    if not prob.scalar:
        raise UsageError(f"{what} needs a scalar problem; {prob.name!r} has {prob.m} outputs")


def cmd_detect(args) -> int:
    prob = _problem(args)
    x = _point(args, prob) if args.mode == "local" else None
    if args.order == "hessian":
        _require_scalar(prob, "Hessian detection")
        p = hessian_pattern(prob.f, prob.n, x=x, mode=args.mode)
    else:
        p = jacobian_pattern(prob.f, prob.n, x=x, mode=args.mode, m=prob.m)
    if args.out:
        io.write_pattern(args.out, p)
    print(stats_line(p))
    return 0


def _color(p: SparsityPattern, kind: str) -> tuple[Coloring, bool]:
    if kind == "star":
        if not p.is_symmetric():
            raise UsageError("star coloring needs a square symmetric pattern")
        c = greedy_star_coloring(p)
        return c, verify_star(p, c)
    c = greedy_distance2_coloring(p)
    return c, verify_structural_orthogonality(p, c)


def cmd_color(args) -> int:
    p = io.read_pattern(args.input)
    c, ok = _color(p, args.kind)
    if args.out:
        io.write_coloring_csv(args.out, c)
    print(f"colors={c.num_colors}")
    if not ok:
        print("error: coloring failed verification", file=sys.stderr)
        return EXIT_FAILURE
    return 0


def _derivative(args, order):
    prob = _problem(args)
    if order == "hessian":
        _require_scalar(prob, "a Hessian")
    x = _point(args, prob)
    if args.method == "dense":
        dense = forward_ad.dense_hessian if order == "hessian" else forward_ad.dense_jacobian
        A = dense(prob.f, x)
        A, products = sp.csc_matrix(A), prob.n
    elif order == "hessian":
        prep = prepare_hessian(prob.f, prob.n)
        A, products = sparse_hessian(prob.f, x, prep), prep.num_products
    else:
        prep = prepare_jacobian(prob.f, prob.n, prob.m)
        A, products = sparse_jacobian(prob.f, x, prep), prep.num_products
    if args.out:
        io.write_matrix(args.out, A)
    print(f"rows={A.shape[0]} cols={A.shape[1]} stored={A.nnz} products={products}")
    return 0


def cmd_jacobian(args) -> int:
    return _derivative(args, "jacobian")


def cmd_hessian(args) -> int:
    return _derivative(args, "hessian")


def _median_time(fn, repeats):
    fn()  # warm-up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_rows(problem: str, sizes, repeats: int = 5, seed: int = 0, batch: int = 1,
               max_dense_n: int | None = None):
    """Timing rows for the Jacobian scaling benchmark, one dict per size."""
    if repeats < 1:
        raise UsageError("--repeats must be at least 1")
    rows = []
    for size in sizes:
        prob = get_problem(problem, size, **({"batch": batch} if problem == "conv" else {}))
        x = np.asarray(prob.draw(np.random.default_rng(seed)), dtype=float)
        pattern = jacobian_pattern(prob.f, prob.n, m=prob.m)
        prep = prepare_jacobian(prob.f, prob.n, prob.m)
        row = {
            "size": size,
            "detect_s": _median_time(lambda: jacobian_pattern(prob.f, prob.n, m=prob.m), repeats),
            "color_s": _median_time(lambda: greedy_distance2_coloring(pattern), repeats),
            "prepared_sparse_s": _median_time(lambda: sparse_jacobian(prob.f, x, prep), repeats),
            "unprepared_sparse_s": _median_time(lambda: sparse_jacobian(prob.f, x), repeats),
            "dense_s": float("nan"),
            "colors": prep.num_colors,
            "nnz": pattern.nnz,
        }
        if max_dense_n is None or prob.n <= max_dense_n:
            row["dense_s"] = _median_time(lambda: forward_ad.dense_jacobian(prob.f, x), repeats)
        rows.append(row)
    return rows


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("no sizes given")
    return sizes


def cmd_bench(args) -> int:
    if args.problem not in PROBLEM_NAMES:
        raise UsageError(f"unknown problem {args.problem!r}; choose from {PROBLEM_NAMES}")
    rows = bench_rows(args.problem, args.sizes, args.repeats, args.seed, args.batch,
                      args.max_dense_n)
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})
    finally:
        if args.csv:
            out.close()
    return 0


_COLOR_CHARS = "123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def render(p: SparsityPattern, coloring: Coloring | None = None,
           max_rows: int = 48, max_cols: int = 96) -> str:
    """ASCII picture of a pattern, downsampled to at most ``max_rows x max_cols`` cells.

    A cell shows ``#`` if any entry in its block is nonzero.  With a column
    coloring each cell shows the color of its columns instead (``*`` when a
    block mixes colors).
    """
    m, n = p.shape
    h, w = min(m, max_rows), min(n, max_cols)
    grid = [[set() for _ in range(w)] for _ in range(h)]
    rows, cols = p.to_coo()
    for i, j in zip(rows.tolist(), cols.tolist()):
        cell = grid[i * h // m][j * w // n]
        cell.add(int(coloring.colors[j]) if coloring is not None else 0)
    lines = []
    for r in grid:
        chars = []
        for cell in r:
            if not cell:
                chars.append(".")
            elif coloring is None:
                chars.append("#")
            elif len(cell) > 1:
                chars.append("*")
            else:
                (c,) = cell
                chars.append(_COLOR_CHARS[c] if c < len(_COLOR_CHARS) else "+")
        lines.append("".join(chars))
    return "\n".join(lines)


def cmd_show(args) -> int:
    p = io.read_pattern(args.input)
    coloring = None
    if args.coloring:
        coloring = io.read_coloring_csv(args.coloring)
        if len(coloring) != p.ncols:
            raise ValueError(f"coloring has {len(coloring)} columns, pattern has {p.ncols}")
    print(render(p, coloring, args.max_rows, args.max_cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="asdtrace", description="Sparsity detection, coloring and sparse AD.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def problem_args(p, *, needs_point):
        p.add_argument("--problem", required=True, help=f"one of {', '.join(PROBLEM_NAMES)}")
        p.add_argument("--n", type=int, required=True,
                       help="grid side (brusselator), image side (conv) or input dimension")
        p.add_argument("--batch", type=int, default=1, help="conv batch size")
        p.add_argument("--seed", type=int, default=0, help="RNG seed for random inputs")
        if needs_point:
            p.add_argument("--input", help="text file with the evaluation point")

    d = sub.add_parser("detect", help="detect a sparsity pattern")
    problem_args(d, needs_point=True)
    d.add_argument("--order", choices=["jacobian", "hessian"], default="jacobian")
    d.add_argument("--mode", choices=["global", "local"], default="global")
    d.add_argument("--out", help="Matrix Market pattern output")
    d.set_defaults(func=cmd_detect)

    c = sub.add_parser("color", help="color a pattern file")
    c.add_argument("--input", required=True, help="Matrix Market pattern file")
    c.add_argument("--kind", choices=["column", "star"], default="column")
    c.add_argument("--out", help="CSV output (column,color)")
    c.set_defaults(func=cmd_color)

    for name, func in (("jacobian", cmd_jacobian), ("hessian", cmd_hessian)):
        s = sub.add_parser(name, help=f"compute a {name} at a point")
        problem_args(s, needs_point=True)
        s.add_argument("--method", choices=["sparse", "dense"], default="sparse")
        s.add_argument("--out", help="Matrix Market real output")
        s.set_defaults(func=func)

    b = sub.add_parser("bench", help="Jacobian timing benchmark")
    b.add_argument("--problem", default="brusselator")
    b.add_argument("--sizes", type=_sizes, default=[6, 12, 24])
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--batch", type=int, default=1)
    b.add_argument("--max-dense-n", type=int, default=None,
                   help="skip dense timing above this input dimension")
    b.add_argument("--csv", help="CSV output file (default: stdout)")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("show", help="ASCII rendering of a pattern file")
    s.add_argument("--input", required=True)
    s.add_argument("--coloring", help="coloring CSV to overlay")
    s.add_argument("--max-rows", type=int, default=48)
    s.add_argument("--max-cols", type=int, default=96)
    s.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"asdtrace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MissingPrimalError, ValueError, TypeError, OSError, ArithmeticError) as exc:
        print(f"asdtrace: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
