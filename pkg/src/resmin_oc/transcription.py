"""Direct collocation: mesh-based discretization of an OCP into a dense NLP.

Defect constraints per interval of width h (F_i = f at the interval's nodes):

    euler            X2 - X1 - h F1
    trapezoidal      X2 - X1 - (h/2) (F1 + F2)
    hermite_simpson  X2 - (X1 + X3)/2 - (h/8) (F1 - F3)        (midpoint block)
                     X3 - X1 - (h/6) (F1 + 4 F2 + F3)          (Simpson block)

The running cost uses the matching quadrature weights (h; h/2, h/2;
h/6, 4h/6, h/6), path constraints are imposed at every mesh node, and simple
bounds are applied per node.  The decision vector is ordered X node-major,
then U node-major, then p, then tf when the horizon is free.
"""

from __future__ import annotations

import numpy as np

from .mesh import DecisionData, Mesh, pack, packed_length, unpack
from .nlp import NlpOptions, NlpProblem, NlpResult, WarmStart
from .nlp import solve as nlp_solve
from .ocp import (
    OcpDefinition,
    batch_dynamics,
    batch_lagrange,
    batch_path_constraint,
    boundary_residual,
    mayer_at,
)

__all__ = [
    "defect_constraints",
    "discrete_cost",
    "node_inputs",
    "assemble_collocation_nlp",
    "solve_collocation",
    "straight_line_guess",
]

_MIN_HORIZON = 1e-6


def node_inputs(z: DecisionData, mesh: Mesh) -> np.ndarray:
    """Input values aligned with the state nodes, shape (state_node_count, m).

    Euler holds the last left-node value at the final node so that every mesh
    node has a defined input.
    """
    if mesh.scheme == "euler":
        return np.vstack([z.U, z.U[-1:]])
    return z.U


def _node_dynamics(z: DecisionData, mesh: Mesh, ocp: OcpDefinition) -> np.ndarray:
    times = z.state_times(mesh)
    return batch_dynamics(ocp, z.X.T, node_inputs(z, mesh).T, times, z.p).T


def defect_constraints(z: DecisionData, mesh: Mesh, ocp: OcpDefinition) -> np.ndarray:
    """Scheme defects, interval-major; zero iff the node data integrates f."""
    z.validate(mesh, ocp)
    h = (z.tf - z.t0) * mesh.fractions
    if np.any(h <= 0):
        raise ValueError("interval widths must be positive")
    hc = h[:, None]
    F = _node_dynamics(z, mesh, ocp)
    if mesh.scheme == "hermite_simpson":
        X1, X2, X3 = z.X[0:-1:2], z.X[1::2], z.X[2::2]
        F1, F2, F3 = F[0:-1:2], F[1::2], F[2::2]
        mid = X2 - 0.5 * (X1 + X3) - (hc / 8.0) * (F1 - F3)
        simpson = X3 - X1 - (hc / 6.0) * (F1 + 4.0 * F2 + F3)
        return np.concatenate([mid[:, None, :], simpson[:, None, :]], axis=1).ravel()
    X1, X2 = z.X[:-1], z.X[1:]
    if mesh.scheme == "trapezoidal":
        out = X2 - X1 - (hc / 2.0) * (F[:-1] + F[1:])
    else:
        out = X2 - X1 - hc * F[:-1]
    return out.ravel()


def quadrature_weights(z_tf_minus_t0: float, mesh: Mesh) -> np.ndarray:
    """Running-cost weight of every state node (Euler: left nodes carry h_k)."""
    h = z_tf_minus_t0 * mesh.fractions
    w = np.zeros(mesh.state_node_count)
    if mesh.scheme == "hermite_simpson":
        w[0:-1:2] += h / 6.0
        w[1::2] += 4.0 * h / 6.0
        w[2::2] += h / 6.0
    elif mesh.scheme == "trapezoidal":
        w[:-1] += h / 2.0
        w[1:] += h / 2.0
    else:
        w[:-1] += h
    return w


def discrete_cost(z: DecisionData, mesh: Mesh, ocp: OcpDefinition) -> float:
    """Mayer term plus the scheme's quadrature of the running cost."""
    z.validate(mesh, ocp)
    total = mayer_at(ocp, z.X[0], z.t0, z.X[-1], z.tf, z.p)
    if ocp.lagrange_cost is not None:
        times = z.state_times(mesh)
        L = batch_lagrange(ocp, z.X.T, node_inputs(z, mesh).T, times, z.p)
        w = quadrature_weights(z.tf - z.t0, mesh)
        total += float(w @ L)
    return total


def node_path_constraints(z: DecisionData, mesh: Mesh, ocp: OcpDefinition) -> np.ndarray:
    """Path constraint rows at every mesh node, node-major, shape (nodes * n_g,)."""
    if ocp.n_g == 0:
        return np.zeros(0)
    times = z.state_times(mesh)
    C = batch_path_constraint(ocp, z.X.T, node_inputs(z, mesh).T, times, z.p)
    return C.T.ravel()


def _bound_vectors(mesh: Mesh, ocp: OcpDefinition, t0: float) -> tuple[np.ndarray, np.ndarray]:
    lower = [np.tile(ocp.x_lower, mesh.state_node_count),
             np.tile(ocp.u_lower, mesh.input_node_count), ocp.p_lower]
    upper = [np.tile(ocp.x_upper, mesh.state_node_count),
             np.tile(ocp.u_upper, mesh.input_node_count), ocp.p_upper]
    if ocp.time_mode == "free_tf":
        lower.append(np.array([max(ocp.tf_lower, t0 + _MIN_HORIZON)]))
        upper.append(np.array([ocp.tf_upper]))
    return np.concatenate(lower), np.concatenate(upper)


def assemble_collocation_nlp(ocp: OcpDefinition, mesh: Mesh,
                             guess: DecisionData) -> NlpProblem:
    """NLP with the discrete cost, defect + boundary equalities, and nodewise
    path constraints; the guess supplies t0 (and tf for fixed horizons)."""
    guess.validate(mesh, ocp)
    t0, tf = guess.t0, guess.tf
    lower, upper = _bound_vectors(mesh, ocp, t0)

    def to_z(v):
        return unpack(v, mesh, ocp, t0=t0, tf=tf)

    def objective(v):
        return discrete_cost(to_z(v), mesh, ocp)

    def equalities(v):
        z = to_z(v)
        defects = defect_constraints(z, mesh, ocp)
        bc = boundary_residual(ocp, z.X[0], z.t0, z.X[-1], z.tf, z.p)
        return np.concatenate([defects, bc])

    inequalities = None
    if ocp.n_g > 0:
        def inequalities(v):
            return node_path_constraints(to_z(v), mesh, ocp)

    return NlpProblem(
        dim=packed_length(mesh, ocp),
        objective=objective,
        equalities=equalities,
        inequalities=inequalities,
        lower=lower,
        upper=upper,
        x0=pack(guess, mesh, ocp),
    )


def solve_collocation(ocp: OcpDefinition, mesh: Mesh, guess: DecisionData,
                      options: NlpOptions | None = None,
                      warm: WarmStart | None = None,
                      ) -> tuple[DecisionData, float, NlpResult]:
    """Solve the collocation NLP; returns (solution, J_c, solver diagnostics).

    Solver nonconvergence is reported through the result status, not raised.
    """
    problem = assemble_collocation_nlp(ocp, mesh, guess)
    result = nlp_solve(problem, options, warm)
    z = unpack(result.x, mesh, ocp, t0=guess.t0, tf=guess.tf)
    return z, discrete_cost(z, mesh, ocp), result


def straight_line_guess(ocp: OcpDefinition, mesh: Mesh, x_start, x_end,
                        t0: float = 0.0, tf: float | None = None) -> DecisionData:
    """Deterministic default guess: states linear between the given endpoint
    values, inputs and parameters at bound midpoints (0 where unbounded),
    tf at the midpoint of its bounds when free."""
    if tf is None:
        if ocp.time_mode == "free_tf" and np.isfinite(ocp.tf_lower) and np.isfinite(ocp.tf_upper):
            tf = 0.5 * (max(ocp.tf_lower, t0 + _MIN_HORIZON) + ocp.tf_upper)
        else:
            tf = t0 + 1.0
    x_start = np.asarray(x_start, dtype=float)
    x_end = np.asarray(x_end, dtype=float)
    tau = mesh.state_node_fractions()[:, None]
    X = (1.0 - tau) * x_start + tau * x_end
    U = np.tile(_bound_midpoint(ocp.u_lower, ocp.u_upper), (mesh.input_node_count, 1))
    p = _bound_midpoint(ocp.p_lower, ocp.p_upper)
    return DecisionData(X=X, U=U, p=p, t0=t0, tf=tf)


def _bound_midpoint(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    both = np.isfinite(lower) & np.isfinite(upper)
    out = np.clip(np.zeros_like(lower), lower, upper)
    out[both] = 0.5 * (lower[both] + upper[both])
    return out
