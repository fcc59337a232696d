"""Posterior error metrics of a represented trajectory and h mesh refinement.

The pointwise ODE residual of a trajectory is

    eps_r(t) = d/dt x~(t) - f(x~(t), u~(t), t, p),

and the absolute local error over a sub-interval between consecutive
collocation points is the integral of its 2-norm (eta, one number per
sub-interval) or of each component's magnitude (sigma, one row per
sub-interval).  Both are estimated by Gauss quadrature.  Mesh refinement
bisects every interval whose aggregated eta exceeds the tolerance and
re-solves, warm-starting from the previous solution evaluated on the new
mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import DecisionData, Mesh
from .nlp import NlpOptions
from .ocp import OcpDefinition, batch_dynamics, batch_path_constraint
from .quadrature import gauss_legendre
from .representation import RepresentedTrajectory, reconstruct
from .transcription import solve_collocation

__all__ = [
    "ErrorReport",
    "ode_residual",
    "collocation_subintervals",
    "absolute_local_error",
    "constraint_violation",
    "violation_grid",
    "aggregate_eta",
    "refine_mesh",
    "refine_loop",
    "RefineRound",
]


@dataclass(frozen=True)
class ErrorReport:
    """Absolute local errors plus nodewise-interior constraint violations."""

    eta: np.ndarray                 # (J,) per sub-interval
    sigma: np.ndarray               # (J, n) per sub-interval, per state
    subintervals: np.ndarray        # (J, 2) sub-interval endpoints
    max_violation: np.ndarray       # (n_g,) max positive path-constraint value
    grid: np.ndarray                # times used for the violation sweep


def ode_residual(traj: RepresentedTrajectory, ocp: OcpDefinition, t, p=None) -> np.ndarray:
    """eps_r(t) for scalar t -> (n,), or an array of times -> (n, N)."""
    p = traj.p if p is None else np.asarray(p, dtype=float)
    scalar = np.isscalar(t) or np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    x = traj.state(ts)
    u = traj.input(ts)
    dx = traj.state_derivative(ts)
    res = dx - batch_dynamics(ocp, x, u, ts, p)
    return res[:, 0] if scalar else res


def collocation_subintervals(mesh: Mesh, t0: float, tf: float) -> np.ndarray:
    """Consecutive collocation-point pairs as a (J, 2) array of times.

    Hermite-Simpson contributes two sub-intervals per mesh interval (node,
    midpoint, node); the two-node schemes contribute one.
    """
    b = t0 + (tf - t0) * mesh.boundaries()
    if mesh.scheme != "hermite_simpson":
        return np.column_stack([b[:-1], b[1:]])
    mid = 0.5 * (b[:-1] + b[1:])
    left = np.empty(2 * mesh.K)
    right = np.empty(2 * mesh.K)
    left[0::2], left[1::2] = b[:-1], mid
    right[0::2], right[1::2] = mid, b[1:]
    return np.column_stack([left, right])


def absolute_local_error(traj: RepresentedTrajectory, ocp: OcpDefinition,
                         subintervals: np.ndarray | None = None,
                         points: int = 7, p=None) -> tuple[np.ndarray, np.ndarray]:
    """(eta, sigma): integrals of ||eps_r||_2 and |eps_r,q| per sub-interval."""
    if subintervals is None:
        subintervals = collocation_subintervals(traj.mesh, traj.t0, traj.tf)
    subintervals = np.asarray(subintervals, dtype=float).reshape(-1, 2)
    rule = gauss_legendre(points)
    a, bnd = subintervals[:, 0], subintervals[:, 1]
    half = 0.5 * (bnd - a)
    t = a[:, None] + half[:, None] * (rule.nodes[None, :] + 1.0)   # (J, q)
    w = half[:, None] * rule.weights[None, :]
    res = ode_residual(traj, ocp, t.ravel(), p)                    # (n, J*q)
    J = subintervals.shape[0]
    res = res.reshape(ocp.n, J, points)
    norm = np.sqrt((res ** 2).sum(axis=0))                         # (J, q)
    eta = (norm * w).sum(axis=1)
    sigma = (np.abs(res) * w[None, :, :]).sum(axis=2).T            # (J, n)
    return eta, sigma


def violation_grid(mesh: Mesh, t0: float, tf: float, per_interval: int = 20) -> np.ndarray:
    """Uniform sweep grid containing every interval boundary."""
    b = t0 + (tf - t0) * mesh.boundaries()
    parts = [np.linspace(b[k], b[k + 1], per_interval + 1)[:-1] for k in range(mesh.K)]
    return np.concatenate(parts + [b[-1:]])


def constraint_violation(traj: RepresentedTrajectory, ocp: OcpDefinition,
                         sample_grid: np.ndarray | None = None,
                         per_interval: int = 20, p=None) -> np.ndarray:
    """Max positive part of each path constraint over the sample grid, (n_g,)."""
    if ocp.n_g == 0:
        return np.zeros(0)
    p = traj.p if p is None else np.asarray(p, dtype=float)
    if sample_grid is None:
        sample_grid = violation_grid(traj.mesh, traj.t0, traj.tf, per_interval)
    ts = np.asarray(sample_grid, dtype=float)
    c = batch_path_constraint(ocp, traj.state(ts), traj.input(ts), ts, p)
    return np.clip(c, 0.0, None).max(axis=1)


def aggregate_eta(mesh: Mesh, eta: np.ndarray) -> np.ndarray:
    """Collapse sub-interval eta values onto mesh intervals by max."""
    eta = np.asarray(eta, dtype=float)
    if mesh.scheme != "hermite_simpson":
        if eta.size != mesh.K:
            raise ValueError("eta length does not match mesh")
        return eta.copy()
    if eta.size != 2 * mesh.K:
        raise ValueError("eta length does not match mesh")
    return eta.reshape(mesh.K, 2).max(axis=1)


def refine_mesh(mesh: Mesh, eta: np.ndarray, eta_tol: float) -> Mesh:
    """Bisect every interval whose eta exceeds the tolerance."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (mesh.K,):
        raise ValueError("eta must hold one value per mesh interval")
    fractions = []
    for frac, err in zip(mesh.fractions, eta):
        if err > eta_tol:
            fractions.extend([frac / 2.0, frac / 2.0])
        else:
            fractions.append(frac)
    if len(fractions) == mesh.K:
        return mesh
    return Mesh(scheme=mesh.scheme, fractions=np.array(fractions),
                quadrature_order=mesh.quadrature_order)


@dataclass
class RefineRound:
    mesh: Mesh
    J_c: float
    eta_max: float
    solver_status: str
    iterations: int


def refine_loop(ocp: OcpDefinition, mesh0: Mesh, guess: DecisionData,
                eta_tol: float, max_rounds: int,
                options: NlpOptions | None = None,
                ) -> tuple[Mesh, DecisionData, list[RefineRound]]:
    """Alternate collocation solve / error estimate / bisection.

    Stops when every aggregated eta is within tolerance or the round budget
    is exhausted; a nonconvergent inner solve aborts with the history so far.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    mesh = mesh0
    z = guess
    history: list[RefineRound] = []
    for _ in range(max_rounds):
        z, J_c, result = solve_collocation(ocp, mesh, z, options)
        traj = reconstruct(z, mesh, ocp, mode="direct")
        eta, _ = absolute_local_error(traj, ocp)
        eta_k = aggregate_eta(mesh, eta)
        history.append(RefineRound(mesh=mesh, J_c=J_c, eta_max=float(eta_k.max()),
                                   solver_status=result.status,
                                   iterations=result.iterations))
        if not result.converged:
            break
        if np.all(eta_k <= eta_tol):
            break
        new_mesh = refine_mesh(mesh, eta_k, eta_tol)
        closed = reconstruct(z, mesh, ocp, mode="continuity_closed")
        z = _resample(closed, new_mesh, z)
        mesh = new_mesh
    return mesh, z, history


def _resample(traj: RepresentedTrajectory, mesh: Mesh, z_old: DecisionData) -> DecisionData:
    """Evaluate a trajectory at a new mesh's nodes to warm-start a re-solve."""
    t0, tf = z_old.t0, z_old.tf
    t_state = t0 + (tf - t0) * mesh.state_node_fractions()
    t_input = t0 + (tf - t0) * mesh.input_node_fractions()
    return DecisionData(
        X=traj.state(t_state).T,
        U=traj.input(t_input).T,
        p=z_old.p.copy(),
        t0=t0,
        tf=tf,
    )
