"""Continuous-time optimal control problem container and pointwise evaluation.

The problem data is a Bolza-form OCP

    minimize  Phi(x(t0), t0, x(tf), tf, p) + int_{t0}^{tf} L(x, u, t, p) dt
    s.t.      dx/dt = f(x, u, t, p)
              c(x, u, t, p) <= 0
              phi(x(t0), t0, x(tf), tf, p) = 0

with simple bounds on x, u, p and the endpoint times.  All problem functions
are plain callables; no symbolic or AD machinery is attached (derivatives are
obtained by finite differences downstream).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "OcpDefinition",
    "dynamics_at",
    "path_constraint_at",
    "boundary_residual",
]

Array = np.ndarray


def _full(dim: int, value: float) -> Array:
    return np.full(dim, value, dtype=float)


@dataclass(frozen=True)
class OcpDefinition:
    """Immutable Bolza optimal control problem.

    Function signatures:

    * ``dynamics(x, u, t, p) -> (n,)``
    * ``lagrange_cost(x, u, t, p) -> scalar``
    * ``mayer_cost(x0, t0, xf, tf, p) -> scalar``
    * ``path_constraint(x, u, t, p) -> (n_g,)`` feasible iff every entry <= 0
    * ``boundary(x0, t0, xf, tf, p) -> (n_q,)`` satisfied iff zero

    If ``vectorized`` is true, ``dynamics``, ``lagrange_cost`` and
    ``path_constraint`` must also accept ``x`` of shape ``(n, N)``, ``u`` of
    shape ``(m, N)`` and ``t`` of shape ``(N,)`` and broadcast over the
    trailing axis (same convention as ``scipy.integrate.solve_ivp``).  The
    evaluation helpers fall back to a python loop otherwise.

    Missing cost/constraint functions default to zero / empty.  Infinite
    bounds are encoded as IEEE +-inf.  ``time_mode`` is ``"fixed"`` (both
    endpoint times taken from the decision data and held) or ``"free_tf"``
    (t0 held, tf optimized within ``tf_lower``/``tf_upper``).
    """

    n: int
    m: int
    dynamics: Callable
    s: int = 0
    n_g: int = 0
    n_q: int = 0
    lagrange_cost: Callable | None = None
    mayer_cost: Callable | None = None
    path_constraint: Callable | None = None
    boundary: Callable | None = None
    x_lower: Array = None
    x_upper: Array = None
    u_lower: Array = None
    u_upper: Array = None
    p_lower: Array = None
    p_upper: Array = None
    t0_lower: float = -np.inf
    t0_upper: float = np.inf
    tf_lower: float = -np.inf
    tf_upper: float = np.inf
    time_mode: str = "fixed"
    vectorized: bool = False
    name: str = ""

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.s < 0:
            raise ValueError("dimensions must satisfy n >= 1, m >= 0, s >= 0")
        if self.time_mode not in ("fixed", "free_tf"):
            raise ValueError(f"unknown time_mode: {self.time_mode!r}")
        defaults = {
            "x_lower": _full(self.n, -np.inf),
            "x_upper": _full(self.n, np.inf),
            "u_lower": _full(self.m, -np.inf),
            "u_upper": _full(self.m, np.inf),
            "p_lower": _full(self.s, -np.inf),
            "p_upper": _full(self.s, np.inf),
        }
        for attr, default in defaults.items():
            value = getattr(self, attr)
            value = default if value is None else np.asarray(value, dtype=float)
            object.__setattr__(self, attr, value)
        for lo, hi, dim in (
            (self.x_lower, self.x_upper, self.n),
            (self.u_lower, self.u_upper, self.m),
            (self.p_lower, self.p_upper, self.s),
        ):
            if lo.shape != (dim,) or hi.shape != (dim,):
                raise ValueError("bound vectors must match declared dimensions")
            if np.any(lo > hi):
                raise ValueError("lower bounds must not exceed upper bounds")
        if self.t0_lower > self.t0_upper or self.tf_lower > self.tf_upper:
            raise ValueError("lower bounds must not exceed upper bounds")


def _check_point(ocp: OcpDefinition, x, u, p) -> tuple[Array, Array, Array]:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    p = np.zeros(ocp.s) if p is None else np.asarray(p, dtype=float)
    if x.shape != (ocp.n,):
        raise ValueError(f"state has shape {x.shape}, expected ({ocp.n},)")
    if u.shape != (ocp.m,):
        raise ValueError(f"input has shape {u.shape}, expected ({ocp.m},)")
    if p.shape != (ocp.s,):
        raise ValueError(f"parameter has shape {p.shape}, expected ({ocp.s},)")
    return x, u, p


def dynamics_at(ocp: OcpDefinition, x, u, t, p=None) -> Array:
    """Evaluate f(x, u, t, p), checking the declared dimensions."""
    x, u, p = _check_point(ocp, x, u, p)
    out = np.asarray(ocp.dynamics(x, u, t, p), dtype=float)
    if out.shape != (ocp.n,):
        raise ValueError(f"dynamics returned shape {out.shape}, expected ({ocp.n},)")
    return out


def path_constraint_at(ocp: OcpDefinition, x, u, t, p=None) -> Array:
    """Evaluate c(x, u, t, p); every entry <= 0 means feasible."""
    x, u, p = _check_point(ocp, x, u, p)
    if ocp.path_constraint is None:
        if ocp.n_g:
            raise ValueError("n_g > 0 but no path_constraint supplied")
        return np.zeros(0)
    out = np.atleast_1d(np.asarray(ocp.path_constraint(x, u, t, p), dtype=float))
    if out.shape != (ocp.n_g,):
        raise ValueError(f"path constraint returned shape {out.shape}, expected ({ocp.n_g},)")
    return out


def boundary_residual(ocp: OcpDefinition, x0, t0, xf, tf, p=None) -> Array:
    """Evaluate phi(x0, t0, xf, tf, p); the zero vector means satisfied."""
    x0 = np.asarray(x0, dtype=float)
    xf = np.asarray(xf, dtype=float)
    p = np.zeros(ocp.s) if p is None else np.asarray(p, dtype=float)
    if x0.shape != (ocp.n,) or xf.shape != (ocp.n,):
        raise ValueError("endpoint states must have shape (n,)")
    if p.shape != (ocp.s,):
        raise ValueError(f"parameter has shape {p.shape}, expected ({ocp.s},)")
    if ocp.boundary is None:
        if ocp.n_q:
            raise ValueError("n_q > 0 but no boundary function supplied")
        return np.zeros(0)
    out = np.atleast_1d(np.asarray(ocp.boundary(x0, t0, xf, tf, p), dtype=float))
    if out.shape != (ocp.n_q,):
        raise ValueError(f"boundary returned shape {out.shape}, expected ({ocp.n_q},)")
    return out


def lagrange_at(ocp: OcpDefinition, x, u, t, p=None) -> float:
    """Evaluate the running cost L(x, u, t, p)."""
    x, u, p = _check_point(ocp, x, u, p)
    if ocp.lagrange_cost is None:
        return 0.0
    return float(ocp.lagrange_cost(x, u, t, p))


def mayer_at(ocp: OcpDefinition, x0, t0, xf, tf, p=None) -> float:
    """Evaluate the endpoint cost Phi(x0, t0, xf, tf, p)."""
    if ocp.mayer_cost is None:
        return 0.0
    p = np.zeros(ocp.s) if p is None else np.asarray(p, dtype=float)
    return float(ocp.mayer_cost(np.asarray(x0, float), t0, np.asarray(xf, float), tf, p))


def batch_dynamics(ocp: OcpDefinition, X: Array, U: Array, T: Array, p: Array) -> Array:
    """f at a batch of points; X is (n, N), U is (m, N), T is (N,).

    Uses the problem's vectorized path when available, otherwise loops.
    """
    if ocp.vectorized:
        out = np.asarray(ocp.dynamics(X, U, T, p), dtype=float)
        return out.reshape(ocp.n, X.shape[1])
    N = X.shape[1]
    out = np.empty((ocp.n, N))
    for i in range(N):
        out[:, i] = np.asarray(ocp.dynamics(X[:, i], U[:, i], T[i], p), dtype=float)
    return out


def batch_lagrange(ocp: OcpDefinition, X: Array, U: Array, T: Array, p: Array) -> Array:
    """L at a batch of points, returned as (N,). Zero when no running cost."""
    N = X.shape[1]
    if ocp.lagrange_cost is None:
        return np.zeros(N)
    if ocp.vectorized:
        return np.asarray(ocp.lagrange_cost(X, U, T, p), dtype=float).reshape(N)
    return np.array([float(ocp.lagrange_cost(X[:, i], U[:, i], T[i], p)) for i in range(N)])


def batch_path_constraint(ocp: OcpDefinition, X: Array, U: Array, T: Array, p: Array) -> Array:
    """c at a batch of points, returned as (n_g, N)."""
    N = X.shape[1]
    if ocp.path_constraint is None or ocp.n_g == 0:
        return np.zeros((0, N))
    if ocp.vectorized:
        out = np.asarray(ocp.path_constraint(X, U, T, p), dtype=float)
        return out.reshape(ocp.n_g, N)
    out = np.empty((ocp.n_g, N))
    for i in range(N):
        out[:, i] = np.atleast_1d(
            np.asarray(ocp.path_constraint(X[:, i], U[:, i], T[i], p), dtype=float)
        )
    return out
