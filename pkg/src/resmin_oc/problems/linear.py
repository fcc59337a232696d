"""Scalar linear-dynamics benchmark with a closed-form state map.

The plant dx/dt = a x + u with x(0) = 0 on the fixed horizon [0, 1] and
running cost (x - x_ref)^2 + rho u^2 is the library's testing oracle: for a
constant input the exact state is

    x(t) = x(0) e^{a t} + (u / a) (e^{a t} - 1),

so discretization error can be measured directly.  Even when the input is a
polynomial, the state is an exponential, so every polynomial scheme leaves a
nonzero residual that shrinks under mesh refinement at the scheme's order.
"""

from __future__ import annotations

import numpy as np

from ..ocp import OcpDefinition

__all__ = ["linear_problem"]


def linear_problem(a: float = -1.0, x_ref: float = 1.0, control_weight: float = 1e-3):
    """Return (OcpDefinition, analytic) where analytic(t, u, x0=0) is the
    constant-input closed form.  Requires a != 0."""
    if a == 0:
        raise ValueError("a must be nonzero for the closed-form solution")

    def dynamics(x, u, t, p):
        return np.asarray([a * x[0] + u[0]])

    def lagrange(x, u, t, p):
        return (x[0] - x_ref) ** 2 + control_weight * u[0] ** 2

    def boundary(x0, t0, xf, tf, p):
        return np.asarray([x0[0]])

    ocp = OcpDefinition(
        n=1, m=1, n_q=1,
        dynamics=dynamics,
        lagrange_cost=lagrange,
        boundary=boundary,
        time_mode="fixed",
        vectorized=True,
        name="linear",
    )

    def analytic(t, u_const: float, x0: float = 0.0):
        t = np.asarray(t, dtype=float)
        return x0 * np.exp(a * t) + (u_const / a) * (np.exp(a * t) - 1.0)

    return ocp, analytic
