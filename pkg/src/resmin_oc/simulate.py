"""Re-simulation of a represented input through the true dynamics.

The represented input u~(t) is fed into an adaptive Dormand-Prince 5(4)
integrator and the resulting state history is compared against the
represented state x~(t).  The maximum step is capped at one hundredth of the
smallest mesh interval, and the output is sampled on a uniform grid of 100
points per mesh interval, so the integration resolves well below the
optimizer's discretization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ocp import OcpDefinition
from .representation import RepresentedTrajectory

__all__ = ["SimResult", "DiscrepancyReport", "integrate_dp54", "simulate", "discrepancy"]

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# Difference between the 5th-order weights and the embedded 4th-order ones.
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@dataclass
class SimResult:
    t: np.ndarray                    # sampled times actually reached
    states: np.ndarray               # (len(t), n)
    max_deviation: np.ndarray        # per-state max |x~ - x_sim|
    integrated_deviation: float      # integral of ||x~ - x_sim||_2
    steps: int
    rejections: int
    success: bool = True
    message: str = ""


@dataclass(frozen=True)
class DiscrepancyReport:
    max_deviation: np.ndarray          # (n,)
    integrated_deviation: np.ndarray   # (n,) integral of |x~_q - x_sim_q|
    total_integrated_deviation: float  # integral of ||x~ - x_sim||_2
    input_total_variation: np.ndarray  # (m,) sum of |du| over the dense grid


def integrate_dp54(f, t0: float, x0: np.ndarray, t_out: np.ndarray,
                   rtol: float = 1e-8, atol: float = 1e-10,
                   max_step: float = np.inf,
                   ) -> tuple[np.ndarray, np.ndarray, int, int, str]:
    """Adaptive RK5(4) from t0 through the sorted output times.

    Returns (t_reached, states, accepted_steps, rejections, message); the
    message is empty on success and the arrays are truncated if the dynamics
    return non-finite values.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    t_out = np.asarray(t_out, dtype=float)
    out = np.empty((t_out.size, n))
    t = float(t0)
    k1 = np.asarray(f(t, x), dtype=float)
    if not np.all(np.isfinite(k1)):
        return t_out[:0], out[:0], 0, 0, "non-finite dynamics at the initial point"
    i_out = 0
    if t_out.size and abs(t_out[0] - t) <= 1e-14 * max(1.0, abs(t)):
        out[0] = x
        i_out = 1
    t_end = float(t_out[-1])
    dt = min(max_step, (t_end - t) / 10.0)
    steps = 0
    rejections = 0
    K = np.empty((7, n))
    while i_out < t_out.size:
        dt = min(dt, max_step, t_out[i_out] - t)
        dt = max(dt, 1e-14 * max(1.0, abs(t)))
        K[0] = k1
        bad = False
        for stage in range(1, 7):
            xs = x + dt * (_A[stage] @ K[:stage])
            K[stage] = f(t + _C[stage] * dt, xs)
            if not np.all(np.isfinite(K[stage])):
                bad = True
                break
        if bad:
            return t_out[:i_out], out[:i_out], steps, rejections, \
                "non-finite dynamics evaluation; integration aborted"
        x_new = x + dt * (_B5 @ K)
        err = dt * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            steps += 1
            t = t + dt
            x = x_new
            k1 = K[6]  # FSAL
            while i_out < t_out.size and t_out[i_out] <= t + 1e-12 * max(1.0, abs(t)):
                out[i_out] = x
                i_out += 1
        else:
            rejections += 1
        factor = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
        dt = dt * min(5.0, max(0.2, factor))
    return t_out, out, steps, rejections, ""


def simulate(ocp: OcpDefinition, traj: RepresentedTrajectory, x0, p=None,
             rtol: float = 1e-8, atol: float = 1e-10,
             points_per_interval: int = 100,
             max_step: float | None = None) -> SimResult:
    """Integrate dx/dt = f(x, u~(t), t, p) from x0 over the trajectory horizon."""
    p = traj.p if p is None else np.asarray(p, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if max_step is None:
        smallest = float(np.min(traj.mesh.fractions)) * (traj.tf - traj.t0)
        max_step = smallest / 100.0
    t_out = _output_grid(traj, points_per_interval)

    def rhs(t, x):
        return np.asarray(ocp.dynamics(x, traj.input(t), t, p), dtype=float)

    t_hit, states, steps, rejections, message = integrate_dp54(
        rhs, traj.t0, x0, t_out, rtol=rtol, atol=atol, max_step=max_step)
    if t_hit.size:
        ref = traj.state(t_hit).T
        dev = np.abs(ref - states)
        max_dev = dev.max(axis=0)
        norms = np.sqrt((dev ** 2).sum(axis=1))
        integrated = float(np.trapezoid(norms, t_hit)) if t_hit.size > 1 else 0.0
    else:
        max_dev = np.full(traj.n, np.nan)
        integrated = np.nan
    return SimResult(
        t=t_hit, states=states, max_deviation=max_dev,
        integrated_deviation=integrated, steps=steps, rejections=rejections,
        success=(message == ""), message=message,
    )


def _output_grid(traj: RepresentedTrajectory, points_per_interval: int) -> np.ndarray:
    b = traj.breaks
    parts = [np.linspace(b[k], b[k + 1], points_per_interval + 1)[:-1]
             for k in range(traj.mesh.K)]
    return np.concatenate(parts + [b[-1:]])


def discrepancy(traj: RepresentedTrajectory, sim: SimResult) -> DiscrepancyReport:
    """Deviation metrics between the represented states and the simulation,
    plus the total variation of each input component (a ringing indicator)."""
    t = sim.t
    ref = traj.state(t).T
    dev = np.abs(ref - sim.states)
    per_state_int = np.array([np.trapezoid(dev[:, q], t) for q in range(dev.shape[1])])
    u = traj.input(t)
    tv = np.abs(np.diff(u, axis=1)).sum(axis=1)
    return DiscrepancyReport(
        max_deviation=dev.max(axis=0),
        integrated_deviation=per_state_int,
        total_integrated_deviation=float(np.trapezoid(np.sqrt((dev ** 2).sum(axis=1)), t)),
        input_total_variation=tv,
    )
