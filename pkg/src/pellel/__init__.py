"""Weighted L2 exterior calculus on grids and minimum-norm solvers for
du = f, dbar w = g, and the potential equation i d dbar u = f on strictly
convex bounded domains."""

from .domain import (BoundaryQuadrature, Domain, Grid, Weight,
                     boundary_quadrature, build_grid, estimate_c)
from .forms import ComplexForm, RealForm, dot, hermitian_dot, norm2, norm11, weighted_inner
from .calculus import d, dbar, delta, partial, t_star_discrete, t_star_formula
from .bridge import (HessianSplit, complex_hessian, hessian_split_identity,
                     levi_lower_bound, real2_to_real11, real11_to_real2, split_1form)
from .minnorm import LinearMap, SolveReport, solve_min_norm, weighted_first_order_map
from .pipeline import (PipelineReport, corollary_constant, solve_dbar,
                       solve_poincare, solve_poincare_lelong, standard_11_form)

__all__ = [
    "BoundaryQuadrature", "ComplexForm", "Domain", "Grid", "HessianSplit",
    "LinearMap", "PipelineReport", "RealForm", "SolveReport", "Weight",
    "boundary_quadrature", "build_grid", "complex_hessian", "corollary_constant",
    "d", "dbar", "delta", "dot", "estimate_c", "hermitian_dot",
    "hessian_split_identity", "levi_lower_bound", "norm2", "norm11", "partial",
    "real2_to_real11", "real11_to_real2", "solve_dbar", "solve_min_norm",
    "solve_poincare", "solve_poincare_lelong", "split_1form", "standard_11_form",
    "t_star_discrete", "t_star_formula", "weighted_first_order_map", "weighted_inner",
]

__version__ = "0.1.0"
