"""Direct collocation for optimal control with integrated-residual
trajectory representation.

Workflow: define an :class:`OcpDefinition`, transcribe it on a :class:`Mesh`
and solve with :func:`solve_collocation`, then either accept the
conventional interpolated trajectory (:func:`reconstruct` in ``"direct"``
mode) or re-optimize the same decision variables with :func:`solve_resmin`
to shrink the integrated ODE residual between collocation points.  Error
metrics, h mesh refinement and a validating re-simulation complete the
pipeline.
"""

from .analysis import (
    ErrorReport,
    absolute_local_error,
    aggregate_eta,
    collocation_subintervals,
    constraint_violation,
    ode_residual,
    refine_loop,
    refine_mesh,
)
from .mesh import DecisionData, Mesh, pack, packed_length, unpack
from .nlp import (
    NlpOptions,
    NlpProblem,
    NlpResult,
    WarmStart,
    fd_gradient,
    fd_jacobian,
)
from .nlp import solve as solve_nlp
from .ocp import (
    OcpDefinition,
    boundary_residual,
    dynamics_at,
    path_constraint_at,
)
from .quadrature import QuadratureRule, gauss_legendre
from .representation import (
    RepresentedTrajectory,
    closure_f2_f3,
    eval_input,
    eval_state,
    eval_state_derivative,
    reconstruct,
)
from .resmin import (
    ResidualReport,
    assemble_resmin_nlp,
    integrated_residual,
    residual_at,
    residual_cost,
    solve_resmin,
)
from .simulate import DiscrepancyReport, SimResult, discrepancy, simulate
from .transcription import (
    assemble_collocation_nlp,
    defect_constraints,
    discrete_cost,
    solve_collocation,
    straight_line_guess,
)

__version__ = "0.1.0"

__all__ = [
    "OcpDefinition", "dynamics_at", "path_constraint_at", "boundary_residual",
    "Mesh", "DecisionData", "pack", "unpack", "packed_length",
    "defect_constraints", "discrete_cost", "assemble_collocation_nlp",
    "solve_collocation", "straight_line_guess",
    "NlpProblem", "NlpOptions", "NlpResult", "WarmStart", "solve_nlp",
    "fd_gradient", "fd_jacobian",
    "RepresentedTrajectory", "reconstruct", "closure_f2_f3",
    "eval_state", "eval_state_derivative", "eval_input",
    "QuadratureRule", "gauss_legendre",
    "ResidualReport", "residual_at", "integrated_residual", "residual_cost",
    "assemble_resmin_nlp", "solve_resmin",
    "ErrorReport", "ode_residual", "collocation_subintervals",
    "absolute_local_error", "constraint_violation", "aggregate_eta",
    "refine_mesh", "refine_loop",
    "SimResult", "DiscrepancyReport", "simulate", "discrepancy",
]
