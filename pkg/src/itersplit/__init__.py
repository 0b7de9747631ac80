"""Operator splitting for linear evolution equations.

Sequential (Lie), symmetrically weighted sequential, Strang and iterative
splitting, with the quadrature and matrix-exponential kernels they need, a
memory-closure transport model and order/error diagnostics.
"""
from .analysis import (
    GrowthReport,
    LeadingTermFit,
    OrderEstimate,
    error_vs_reference,
    growth_bound_check,
    leading_term_fit,
    observed_order,
)
from .errors import DimensionError, DivergenceError, DomainError, UnsupportedOperatorError
from .linalg import DiagonalGenerator, TimeGrid, commutator, expm, propagate_affine, propagate_affine_exact
from .models import (
    MemoryClosure,
    TransportConfig,
    example1_exact,
    example1_problem,
    reference_solution,
    simpson_closure_series,
    solve_transport,
    trapezoid_closure_exact,
)
from .quadrature import BOOLE, SIMPSON, SIMPSON38, TRAPEZOID, QuadratureRule, integrate, rule_coefficients
from .schemes import (
    IterativeConfig,
    NonlinearSplitProblem,
    SplitProblem,
    Trajectory,
    iterative_solve,
    lie_step,
    run_scheme,
    strang_step,
    swss_step,
    to_trajectory,
)

__version__ = "0.1.0"
