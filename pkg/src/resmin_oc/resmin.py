"""Integrated-residual representation of a collocation solution.

Instead of accepting the interpolated trajectory implied by the discrete
solution, the same decision variables are re-optimized to minimize the
Gauss-quadrature approximation of

    int_{t0}^{tf} || d/dt x~(t) - f(x~(t), u~(t), t, p) ||_2^2 dt

subject to (i) the discrete cost not exceeding the collocation optimum J_c,
(ii) the original path constraints at the mesh nodes, and (iii) the boundary
conditions.  Defect constraints are deliberately absent; state continuity is
guaranteed structurally by the continuity-closed reconstruction, so no extra
constraint rows are needed.  Warm-starting from the collocation solution
keeps the solve cheap, and because that point is feasible here, the optimal
residual can only improve on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import DecisionData, Mesh, pack, packed_length, unpack
from .nlp import NlpOptions, NlpProblem, NlpResult, WarmStart
from .nlp import solve as nlp_solve
from .ocp import OcpDefinition, batch_dynamics, boundary_residual
from .quadrature import gauss_legendre
from .representation import RepresentedTrajectory, reconstruct
from .transcription import _bound_vectors, discrete_cost, node_path_constraints

__all__ = [
    "ResidualReport",
    "residual_at",
    "integrated_residual",
    "residual_cost",
    "assemble_resmin_nlp",
    "solve_resmin",
]


@dataclass(frozen=True)
class ResidualReport:
    """Quadrature of the squared ODE residual, total and broken down."""

    per_interval: np.ndarray   # (K,)
    per_state: np.ndarray      # (n,)
    total: float

    def __post_init__(self):
        if np.any(self.per_interval < 0) or np.any(self.per_state < 0):
            raise ValueError("residual contributions must be nonnegative")


def residual_at(traj: RepresentedTrajectory, ocp: OcpDefinition, t, p=None) -> float:
    """Squared 2-norm of the ODE residual of the represented trajectory at t."""
    p = traj.p if p is None else np.asarray(p, dtype=float)
    x = traj.state(t)
    u = traj.input(t)
    dx = traj.state_derivative(t)
    f = np.asarray(ocp.dynamics(x, u, t, p), dtype=float)
    r = dx - f
    return float(r @ r)


def _quadrature_grid(mesh: Mesh, t0: float, tf: float) -> tuple[np.ndarray, np.ndarray]:
    """Interval-mapped Gauss points and weights, both shaped (K, N_q)."""
    rule = gauss_legendre(mesh.quadrature_order)
    h = (tf - t0) * mesh.fractions
    left = t0 + (tf - t0) * mesh.boundaries()[:-1]
    t = left[:, None] + 0.5 * (rule.nodes[None, :] + 1.0) * h[:, None]
    w = 0.5 * h[:, None] * rule.weights[None, :]
    return t, w


def residual_cost(z: DecisionData, mesh: Mesh, ocp: OcpDefinition,
                  mode: str = "continuity_closed") -> ResidualReport:
    """Gauss-quadrature residual report for either reconstruction mode."""
    traj = reconstruct(z, mesh, ocp, mode=mode)
    t, w = _quadrature_grid(mesh, z.t0, z.tf)
    ts = t.ravel()
    x = traj.state(ts)
    u = traj.input(ts)
    dx = traj.state_derivative(ts)
    f = batch_dynamics(ocp, x, u, ts, z.p)
    err2 = (dx - f) ** 2                          # (n, K*N_q)
    w_flat = w.ravel()
    per_point = err2.sum(axis=0)
    per_interval = (per_point * w_flat).reshape(mesh.K, -1).sum(axis=1)
    per_state = err2 @ w_flat
    return ResidualReport(
        per_interval=per_interval,
        per_state=per_state,
        total=float(per_interval.sum()),
    )


def integrated_residual(z: DecisionData, mesh: Mesh, ocp: OcpDefinition) -> ResidualReport:
    """Residual report of the continuity-closed representation of z."""
    return residual_cost(z, mesh, ocp, mode="continuity_closed")


def assemble_resmin_nlp(ocp: OcpDefinition, mesh: Mesh, J_c: float,
                        z_c: DecisionData) -> NlpProblem:
    """Representation NLP: minimize the integrated residual over the same
    decision variables, bounded by the collocation cost.

    Inequality rows are the nodewise path constraints followed by the single
    cost-bound row ``discrete_cost(z) - J_c <= 0``; equalities are the
    boundary conditions.  No defect rows appear.
    """
    z_c.validate(mesh, ocp)
    t0, tf = z_c.t0, z_c.tf
    lower, upper = _bound_vectors(mesh, ocp, t0)

    def to_z(v):
        return unpack(v, mesh, ocp, t0=t0, tf=tf)

    def objective(v):
        return integrated_residual(to_z(v), mesh, ocp).total

    def objective_residuals(v):
        z = to_z(v)
        traj = reconstruct(z, mesh, ocp, mode="continuity_closed")
        t, w = _quadrature_grid(mesh, z.t0, z.tf)
        ts = t.ravel()
        err = traj.state_derivative(ts) - batch_dynamics(
            ocp, traj.state(ts), traj.input(ts), ts, z.p)
        return (np.sqrt(w.ravel())[None, :] * err).ravel()

    def equalities(v):
        z = to_z(v)
        return boundary_residual(ocp, z.X[0], z.t0, z.X[-1], z.tf, z.p)

    def inequalities(v):
        z = to_z(v)
        cost_row = np.array([discrete_cost(z, mesh, ocp) - J_c])
        if ocp.n_g > 0:
            return np.concatenate([node_path_constraints(z, mesh, ocp), cost_row])
        return cost_row

    return NlpProblem(
        dim=packed_length(mesh, ocp),
        objective=objective,
        equalities=equalities if ocp.n_q > 0 else None,
        inequalities=inequalities,
        lower=lower,
        upper=upper,
        x0=pack(z_c, mesh, ocp),
        objective_residuals=objective_residuals,
    )


def solve_resmin(ocp: OcpDefinition, mesh: Mesh, z_c: DecisionData, J_c: float,
                 options: NlpOptions | None = None,
                 ) -> tuple[DecisionData, ResidualReport, NlpResult]:
    """Minimize the integrated residual starting from the collocation solution.

    The start is feasible, so the result never reports a residual above the
    starting one: if the solver drifts (nonconvergence, tolerance effects),
    the collocation point itself is returned with a diagnostic message.
    """
    opts = options or NlpOptions()
    problem = assemble_resmin_nlp(ocp, mesh, J_c, z_c)
    result = nlp_solve(problem, opts, warm=WarmStart(x=pack(z_c, mesh, ocp)))
    z = unpack(result.x, mesh, ocp, t0=z_c.t0, tf=z_c.tf)
    report = integrated_residual(z, mesh, ocp)
    start_report = integrated_residual(z_c, mesh, ocp)
    tol = opts.kkt_tolerance
    acceptable = (
        report.total <= start_report.total + tol
        and discrete_cost(z, mesh, ocp) <= J_c + tol
        and result.max_equality_violation <= tol
    )
    if not acceptable:
        result.message = (result.message + "; " if result.message else "") + \
            "result did not improve on the feasible start; returning the start"
        return z_c.copy(), start_report, result
    return z, report, result
