"""Piecewise-polynomial trajectory evaluators built from discrete node data.

Two reconstruction modes are provided:

* ``"direct"`` -- conventional interpolation matching the transcription
  scheme: the state polynomial in each interval is anchored at the left node
  value with derivative values F_i = f(X_i, U_i, t_i, p) taken verbatim at
  the interval's nodes.  For node data that violates the defect constraints
  the state curve is generally discontinuous at interval boundaries.

* ``"continuity_closed"`` -- the interior/terminal derivative values are
  replaced by closed-form functions of the node states, chosen so that the
  state polynomial passes through every node value exactly.  The resulting
  curve is continuous for arbitrary node data, which lets an optimizer move
  the nodes freely without extra continuity constraints.

For Hermite-Simpson the closure is

    F2 = -(5 X1 - 4 X2 - X3 + F1 h) / (2 h)
    F3 =  (4 X1 - 8 X2 + 4 X3 + F1 h) / h

(a cubic through X1 with initial slope F1 hitting X2 at the midpoint and X3
at the right end).  The trapezoidal analogue is F2 = 2 (X2 - X1) / h - F1 and
the Euler one replaces the slope by (X2 - X1) / h.

State polynomials are stored as coefficients in the local variable
s = t - t_k and evaluated in Horner form; the derivative coefficients are the
exact analytic derivative of the state coefficients.  Inputs interpolate as
piecewise constant / linear / quadratic for Euler / trapezoidal /
Hermite-Simpson respectively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import DecisionData, Mesh
from .ocp import OcpDefinition, batch_dynamics

__all__ = [
    "RepresentedTrajectory",
    "reconstruct",
    "closure_f2_f3",
    "eval_state",
    "eval_state_derivative",
    "eval_input",
]

MODES = ("direct", "continuity_closed")

_TIME_SLACK = 1e-9  # relative tolerance when classifying t against [t0, tf]


@dataclass(frozen=True)
class RepresentedTrajectory:
    """Immutable piecewise-polynomial trajectory (state, derivative, input)."""

    mesh: Mesh
    t0: float
    tf: float
    p: np.ndarray
    closure_mode: str
    breaks: np.ndarray        # (K+1,) interval boundary times
    state_coef: np.ndarray    # (K, n, 4) coefficients of s^0..s^3
    deriv_coef: np.ndarray    # (K, n, 3)
    input_coef: np.ndarray    # (K, m, 3)

    @property
    def n(self) -> int:
        return self.state_coef.shape[1]

    @property
    def m(self) -> int:
        return self.input_coef.shape[1]

    def interval_index(self, t: np.ndarray) -> np.ndarray:
        """Owning interval of each time; boundaries resolve to the left interval."""
        t = np.asarray(t, dtype=float)
        slack = _TIME_SLACK * max(self.tf - self.t0, 1.0)
        if np.any(t < self.t0 - slack) or np.any(t > self.tf + slack):
            raise ValueError("evaluation time outside the trajectory horizon")
        k = np.searchsorted(self.breaks, t, side="left") - 1
        return np.clip(k, 0, self.mesh.K - 1)

    def state(self, t) -> np.ndarray:
        return _eval_poly(self, self.state_coef, t)

    def state_derivative(self, t) -> np.ndarray:
        return _eval_poly(self, self.deriv_coef, t)

    def input(self, t) -> np.ndarray:
        return _eval_poly(self, self.input_coef, t)


def _eval_poly(traj: RepresentedTrajectory, coef: np.ndarray, t) -> np.ndarray:
    """Horner evaluation; scalar t gives (dim,), array t gives (dim, N)."""
    scalar = np.isscalar(t) or np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    k = traj.interval_index(ts)
    s = ts - traj.breaks[k]
    c = coef[k]                      # (N, dim, ncoef)
    out = c[:, :, -1]
    for j in range(c.shape[2] - 2, -1, -1):
        out = out * s[:, None] + c[:, :, j]
    return out[0] if scalar else out.T


def closure_f2_f3(X1, X2, X3, F1, h):
    """Mid/right derivative values making the interval cubic hit X2 and X3.

    Works elementwise on arrays; ``h`` must be positive.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("interval width h must be positive")
    X1, X2, X3, F1 = (np.asarray(a, dtype=float) for a in (X1, X2, X3, F1))
    F2 = -(5.0 * X1 - 4.0 * X2 - X3 + F1 * h) / (2.0 * h)
    F3 = (4.0 * X1 - 8.0 * X2 + 4.0 * X3 + F1 * h) / h
    return F2, F3


def _node_dynamics(z: DecisionData, mesh: Mesh, ocp: OcpDefinition) -> np.ndarray:
    """f evaluated at every state node, shape (node_count, n).

    For Euler the input at the final node is the held left-node value (the
    piecewise-constant input extends to tf).
    """
    times = z.state_times(mesh)
    X = z.X.T
    if mesh.scheme == "euler":
        U = np.vstack([z.U, z.U[-1:]]).T
    else:
        U = z.U.T
    return batch_dynamics(ocp, X, U, times, z.p).T


def reconstruct(z: DecisionData, mesh: Mesh, ocp: OcpDefinition,
                mode: str = "direct") -> RepresentedTrajectory:
    """Build the piecewise-polynomial trajectory for the given node data."""
    if mode not in MODES:
        raise ValueError(f"unknown reconstruction mode {mode!r}; expected one of {MODES}")
    z.validate(mesh, ocp)
    K, n, m = mesh.K, ocp.n, ocp.m
    dt = z.tf - z.t0
    breaks = z.t0 + dt * mesh.boundaries()
    h = dt * mesh.fractions                     # (K,)
    hc = h[:, None]

    state_coef = np.zeros((K, n, 4))
    deriv_coef = np.zeros((K, n, 3))
    input_coef = np.zeros((K, m, 3))

    if mesh.scheme == "hermite_simpson":
        X1, X2, X3 = z.X[0:-1:2], z.X[1::2], z.X[2::2]
        U1, U2, U3 = z.U[0:-1:2], z.U[1::2], z.U[2::2]
        if mode == "direct":
            F = _node_dynamics(z, mesh, ocp)
            F1, F2, F3 = F[0:-1:2], F[1::2], F[2::2]
        else:
            times = z.state_times(mesh)
            F1 = batch_dynamics(ocp, X1.T, U1.T, times[0:-1:2], z.p).T
            F2, F3 = closure_f2_f3(X1, X2, X3, F1, hc)
        state_coef[:, :, 0] = X1
        state_coef[:, :, 1] = F1
        state_coef[:, :, 2] = (-3.0 * F1 + 4.0 * F2 - F3) / (2.0 * hc)
        state_coef[:, :, 3] = (2.0 / 3.0) * (F1 - 2.0 * F2 + F3) / hc**2
        input_coef[:, :, 0] = U1
        input_coef[:, :, 1] = (-3.0 * U1 + 4.0 * U2 - U3) / hc
        input_coef[:, :, 2] = 2.0 * (U1 - 2.0 * U2 + U3) / hc**2
    elif mesh.scheme == "trapezoidal":
        X1, X2 = z.X[:-1], z.X[1:]
        U1, U2 = z.U[:-1], z.U[1:]
        F = _node_dynamics(z, mesh, ocp)
        F1 = F[:-1]
        if mode == "direct":
            F2 = F[1:]
        else:
            F2 = 2.0 * (X2 - X1) / hc - F1
        state_coef[:, :, 0] = X1
        state_coef[:, :, 1] = F1
        state_coef[:, :, 2] = (F2 - F1) / (2.0 * hc)
        input_coef[:, :, 0] = U1
        input_coef[:, :, 1] = (U2 - U1) / hc
    else:  # euler
        X1, X2 = z.X[:-1], z.X[1:]
        if mode == "direct":
            F = _node_dynamics(z, mesh, ocp)
            slope = F[:-1]
        else:
            slope = (X2 - X1) / hc
        state_coef[:, :, 0] = X1
        state_coef[:, :, 1] = slope
        input_coef[:, :, 0] = z.U

    deriv_coef[:, :, 0] = state_coef[:, :, 1]
    deriv_coef[:, :, 1] = 2.0 * state_coef[:, :, 2]
    deriv_coef[:, :, 2] = 3.0 * state_coef[:, :, 3]

    return RepresentedTrajectory(
        mesh=mesh, t0=z.t0, tf=z.tf, p=z.p.copy(), closure_mode=mode,
        breaks=breaks, state_coef=state_coef, deriv_coef=deriv_coef,
        input_coef=input_coef,
    )


def eval_state(traj: RepresentedTrajectory, t) -> np.ndarray:
    """State value at time t (scalar -> (n,), array -> (n, N))."""
    return traj.state(t)


def eval_state_derivative(traj: RepresentedTrajectory, t) -> np.ndarray:
    """Analytic derivative of the state polynomial at time t."""
    return traj.state_derivative(t)


def eval_input(traj: RepresentedTrajectory, t) -> np.ndarray:
    """Interpolated input at time t (scalar -> (m,), array -> (m, N))."""
    return traj.input(t)
