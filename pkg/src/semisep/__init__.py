"""Determinants of semi-separable integral operators.

Reduces Fredholm and 2-modified Fredholm determinants of operators with
matrix-valued semi-separable kernels to small-space determinants through
Volterra integral equations, cross-validated against a dense Nystrom
oracle, with an applications layer for 1-D matrix Schrodinger scattering:
Jost functions, bound-state counting, and the weighted-trace count bound.
"""

from .errors import (
    ContractError,
    ConvergenceError,
    DimensionError,
    DomainError,
    GridSizeError,
    ResonanceWarning,
    RouteMismatchError,
    SemisepError,
    SingularOperatorError,
    TruncationError,
)
from .kernels import BlockStructure, OperatorFunction, SemiSeparableKernel
from .linalg import det, det2_matrix, herm_eigs, polar_factor
from .quadrature import (
    Quadrature,
    TruncationReport,
    build_grid,
    build_grid_from_edges,
    truncate_interval,
)
from .reduction import (
    DetResult,
    PropagatorU,
    VolterraSolution,
    det1_semiseparable,
    det2_nystrom,
    det2_semiseparable,
    det2_volterra_is_one,
    nystrom_matrix,
    propagator,
    resolvent_kernel,
    resolvent_matrix,
    solve_volterra,
)
from .schrodinger import (
    JostData,
    Potential,
    SpectralPoint,
    bargmann_bound,
    build_K_fullline,
    build_K_halfline,
    build_Ktilde_system,
    count_bound_states,
    jost_function,
    jost_pais_check,
    jost_solution,
    potential_grid,
    system_det2_check,
)

__version__ = "0.1.0"

__all__ = [
    "BlockStructure",
    "ContractError",
    "ConvergenceError",
    "DetResult",
    "DimensionError",
    "DomainError",
    "GridSizeError",
    "JostData",
    "OperatorFunction",
    "Potential",
    "PropagatorU",
    "Quadrature",
    "ResonanceWarning",
    "RouteMismatchError",
    "SemiSeparableKernel",
    "SemisepError",
    "SingularOperatorError",
    "SpectralPoint",
    "TruncationError",
    "TruncationReport",
    "VolterraSolution",
    "bargmann_bound",
    "build_K_fullline",
    "build_K_halfline",
    "build_Ktilde_system",
    "build_grid",
    "build_grid_from_edges",
    "count_bound_states",
    "det",
    "det1_semiseparable",
    "det2_matrix",
    "det2_nystrom",
    "det2_semiseparable",
    "det2_volterra_is_one",
    "herm_eigs",
    "jost_function",
    "jost_pais_check",
    "jost_solution",
    "nystrom_matrix",
    "polar_factor",
    "potential_grid",
    "propagator",
    "resolvent_kernel",
    "resolvent_matrix",
    "solve_volterra",
    "system_det2_check",
]
