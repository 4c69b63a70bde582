"""Sparsity pattern detection with tracer numbers, and automatic sparse differentiation.

Typical use::

    import numpy as np
    import asdtrace as at

    f = at.BrusselatorProblem(6)
    prep = at.prepare_jacobian(f, f.n)          # detect + color once
    J = at.sparse_jacobian(f, np.ones(f.n), prep)   # scipy CSC matrix

Programs are ordinary numpy code.  Use :mod:`asdtrace.ops` for math
functions and branch-free selection so the same code runs on floats, dual
numbers and tracers.
"""
from . import ops
from .coloring import (
    Coloring,
    greedy_distance2_coloring,
    greedy_star_coloring,
    verify_star,
    verify_structural_orthogonality,
)
from .detection import (
    NonFinitePrimalWarning,
    SparsityPattern,
    hessian_pattern,
    hessian_pattern_global,
    hessian_pattern_local,
    jacobian_pattern,
    jacobian_pattern_global,
    jacobian_pattern_local,
)
from .forward_ad import (
    Dual,
    SecondOrderDual,
    dense_hessian,
    dense_jacobian,
    gradient,
    hvp_batch,
    jvp_batch,
)
from .operators import OperatorClassification, lookup, register_operator, registry
from .pattern_store import IndexPairSet, IndexSet, pair_product, pair_union, singleton, union
from .problems import BrusselatorProblem, ConvProblem, get_problem
from .sparse_pipeline import (
    HessianPrep,
    JacobianPrep,
    prepare_hessian,
    prepare_hessian_from_pattern,
    prepare_jacobian,
    prepare_jacobian_from_pattern,
    sparse_hessian,
    sparse_jacobian,
)
from .tensor_ops import conservative_collapse, det, matmul, norm, tracer_matmul
from .tracers import (
    GlobalCondition,
    GradientTracer,
    HessianTracer,
    LocalTracer,
    MissingPrimalError,
    apply_local,
    compare,
    propagate_first_order,
    propagate_second_order,
    select,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
