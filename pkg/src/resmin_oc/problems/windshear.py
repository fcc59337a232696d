"""Aircraft go-around through a microburst: maximize the altitude floor.

A point-mass transport aircraft crosses a downburst wind field during a
fixed 40 s go-around.  The wind has a horizontal component w_x(d) sweeping
from headwind to tailwind and a vertical component w_h(d, h) with a strong
central downdraft, both entering the airspeed/path-angle equations through
their total time derivatives.  The angle of attack is rate-limited, so its
rate nu is the control; a static parameter h_min with objective -h_min and
path constraint h(t) >= h_min turns the minimax altitude objective into a
Bolza problem.  This control formulation is known to produce singular arcs,
so interpolated inputs tend to ring.

All aerodynamic tables, wind coefficients, bounds and boundary values live
in the versioned parameter file ``data/windshear.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..mesh import DecisionData, Mesh
from ..ocp import OcpDefinition

__all__ = ["WindshearParams", "load_windshear_params", "windshear_problem"]

_REQUIRED_KEYS = (
    "gravity_ft_s2", "weight_lb", "air_density_slug_ft3", "wing_area_ft2",
    "thrust_inclination_rad", "thrust_poly_lb", "throttle_initial",
    "throttle_rate_per_s", "lift_poly", "lift_stall_quadratic",
    "lift_stall_break_rad", "drag_poly", "wind",
    "initial_distance_ft", "initial_altitude_ft", "initial_airspeed_ft_s",
    "initial_path_angle_rad", "initial_alpha_rad", "terminal_path_angle_rad",
    "alpha_max_rad", "alpha_rate_max_rad_s", "t0_s", "tf_s",
    "state_lower", "state_upper", "h_min_lower_ft", "h_min_upper_ft",
)
_WIND_KEYS = (
    "intensity", "x1_ft", "x2_ft", "x3_ft", "center_ft", "plateau_ft_s",
    "ramp_slope_per_s", "horizontal_cubic", "horizontal_quartic",
    "downdraft_cubic", "downdraft_quartic", "downdraft_peak_ft_s",
    "downdraft_decay_ft4", "reference_altitude_ft",
)


@dataclass(frozen=True)
class WindshearParams:
    mass: float
    gravity: float
    thrust_inclination: float
    thrust_poly: np.ndarray
    lift_poly: np.ndarray
    drag_poly: np.ndarray
    wind: dict
    h_min_lower: float
    h_min_upper: float
    raw: dict


def load_windshear_params(path=None) -> WindshearParams:
    """Load and validate the parameter file (default: the packaged one)."""
    try:
        if path is None:
            text = resources.files("resmin_oc.problems").joinpath(
                "data/windshear.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"windshear parameter file could not be loaded: {exc}") from exc
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ValueError(f"windshear parameter file is missing keys: {missing}")
    missing_wind = [k for k in _WIND_KEYS if k not in raw["wind"]]
    if missing_wind:
        raise ValueError(f"windshear wind model is missing keys: {missing_wind}")
    thrust = np.asarray(raw["thrust_poly_lb"], dtype=float)
    lift = np.asarray(raw["lift_poly"], dtype=float)
    drag = np.asarray(raw["drag_poly"], dtype=float)
    if thrust.shape != (3,) or lift.shape != (2,) or drag.shape != (3,):
        raise ValueError("windshear aerodynamic tables have unexpected degrees")
    if len(raw["state_lower"]) != 5 or len(raw["state_upper"]) != 5:
        raise ValueError("windshear state bounds must have 5 entries")
    return WindshearParams(
        mass=float(raw["weight_lb"]) / float(raw["gravity_ft_s2"]),
        gravity=float(raw["gravity_ft_s2"]),
        thrust_inclination=float(raw["thrust_inclination_rad"]),
        thrust_poly=thrust,
        lift_poly=lift,
        drag_poly=drag,
        wind=dict(raw["wind"]),
        h_min_lower=float(raw["h_min_lower_ft"]),
        h_min_upper=float(raw["h_min_upper_ft"]),
        raw=raw,
    )


def _wind_profiles(wind: dict, scale: float):
    """Horizontal profile A(x), downdraft profile B(x) and their x-derivatives.

    Both profiles are C^1: quartic transition layers match the plateau/ramp
    values and slopes at the junctions.
    """
    x1, x2, x3 = wind["x1_ft"], wind["x2_ft"], wind["x3_ft"]
    xc = wind["center_ft"]
    plateau = wind["plateau_ft_s"]
    slope = wind["ramp_slope_per_s"]
    a3, a4 = wind["horizontal_cubic"], wind["horizontal_quartic"]
    d3, d4 = wind["downdraft_cubic"], wind["downdraft_quartic"]
    peak = wind["downdraft_peak_ft_s"]
    decay = wind["downdraft_decay_ft4"]
    k = wind["intensity"] * scale

    def A(x):
        x = np.asarray(x, dtype=float)
        y = x3 - x
        return k * np.select(
            [x < x1, x <= x2, x <= x3],
            [-plateau + a3 * x ** 3 + a4 * x ** 4,
             slope * (x - xc),
             plateau - a3 * y ** 3 - a4 * y ** 4],
            default=plateau,
        )

    def dA(x):
        x = np.asarray(x, dtype=float)
        y = x3 - x
        return k * np.select(
            [x < x1, x <= x2, x <= x3],
            [3 * a3 * x ** 2 + 4 * a4 * x ** 3,
             np.full_like(x, slope),
             3 * a3 * y ** 2 + 4 * a4 * y ** 3],
            default=0.0,
        )

    def B(x):
        x = np.asarray(x, dtype=float)
        y = x3 - x
        u = x - xc
        return k * np.select(
            [x < x1, x <= x2, x <= x3],
            [d3 * x ** 3 + d4 * x ** 4,
             peak * np.exp(-decay * u ** 4),
             d3 * y ** 3 + d4 * y ** 4],
            default=0.0,
        )

    def dB(x):
        x = np.asarray(x, dtype=float)
        y = x3 - x
        u = x - xc
        return k * np.select(
            [x < x1, x <= x2, x <= x3],
            [3 * d3 * x ** 2 + 4 * d4 * x ** 3,
             -4.0 * decay * u ** 3 * peak * np.exp(-decay * u ** 4),
             -(3 * d3 * y ** 2 + 4 * d4 * y ** 3)],
            default=0.0,
        )

    return A, dA, B, dB


def windshear_problem(K: int = 15, scheme: str = "hermite_simpson",
                      wind_scale: float = 1.0, params_path=None):
    """Return (OcpDefinition, Mesh, initial guess); wind_scale=0 removes the wind."""
    params = load_windshear_params(params_path)
    raw = params.raw
    m = params.mass
    g = params.gravity
    delta = params.thrust_inclination
    t_a0, t_a1, t_a2 = params.thrust_poly
    cl0, cl1 = params.lift_poly
    cl2 = float(raw["lift_stall_quadratic"])
    alpha_star = float(raw["lift_stall_break_rad"])
    cd0, cd1, cd2 = params.drag_poly
    rho_S_half = 0.5 * float(raw["air_density_slug_ft3"]) * float(raw["wing_area_ft2"])
    beta0 = float(raw["throttle_initial"])
    beta_rate = float(raw["throttle_rate_per_s"])
    t_full = (1.0 - beta0) / beta_rate
    h_ref = float(params.wind["reference_altitude_ft"])
    A, dA, B, dB = _wind_profiles(params.wind, wind_scale)

    def dynamics(x, u, t, p):
        d, h, V, gamma, alpha = x[0], x[1], x[2], x[3], x[4]
        t = np.asarray(t, dtype=float)
        sin_g, cos_g = np.sin(gamma), np.cos(gamma)
        beta = np.where(t < t_full, beta0 + beta_rate * t, 1.0)
        thrust = beta * (t_a0 + t_a1 * V + t_a2 * V ** 2)
        excess = alpha - alpha_star
        c_lift = cl0 + cl1 * alpha + np.where(excess > 0, cl2 * excess ** 2, 0.0)
        c_drag = cd0 + cd1 * alpha + cd2 * alpha ** 2
        q = rho_S_half * V ** 2
        lift, drag = q * c_lift, q * c_drag
        d_dot = V * cos_g + A(d)
        h_dot = V * sin_g + (h / h_ref) * B(d)
        wx_dot = dA(d) * d_dot
        wh_dot = (h / h_ref) * dB(d) * d_dot + (B(d) / h_ref) * h_dot
        V_dot = ((thrust * np.cos(alpha + delta) - drag) / m - g * sin_g
                 - wx_dot * cos_g - wh_dot * sin_g)
        gamma_dot = ((thrust * np.sin(alpha + delta) + lift) / (m * V)
                     - (g / V) * cos_g + (wx_dot * sin_g - wh_dot * cos_g) / V)
        return np.asarray([d_dot, h_dot, V_dot, gamma_dot, u[0]])

    def mayer(x0, t0, xf, tf, p):
        return -p[0]

    def path(x, u, t, p):
        return np.asarray([p[0] - x[1]])

    x_init = np.asarray([
        raw["initial_distance_ft"], raw["initial_altitude_ft"],
        raw["initial_airspeed_ft_s"], raw["initial_path_angle_rad"],
        raw["initial_alpha_rad"],
    ], dtype=float)
    gamma_term = float(raw["terminal_path_angle_rad"])

    def boundary(x0, t0, xf, tf, p):
        return np.concatenate([x0 - x_init, [xf[3] - gamma_term]])

    rate_max = float(raw["alpha_rate_max_rad_s"])
    ocp = OcpDefinition(
        n=5, m=1, s=1, n_g=1, n_q=6,
        dynamics=dynamics,
        mayer_cost=mayer,
        path_constraint=path,
        boundary=boundary,
        x_lower=np.asarray(raw["state_lower"], dtype=float),
        x_upper=np.asarray(raw["state_upper"], dtype=float),
        u_lower=np.asarray([-rate_max]),
        u_upper=np.asarray([rate_max]),
        p_lower=np.asarray([params.h_min_lower]),
        p_upper=np.asarray([params.h_min_upper]),
        time_mode="fixed",
        vectorized=True,
        name="windshear",
    )
    mesh = Mesh.uniform(K, scheme)
    guess = _initial_guess(ocp, mesh, raw, x_init, gamma_term)
    return ocp, mesh, guess


def _initial_guess(ocp: OcpDefinition, mesh: Mesh, raw: dict,
                   x_init: np.ndarray, gamma_term: float) -> DecisionData:
    """Level-flight guess: distance advances at the initial airspeed, other
    states hold their initial values except gamma, which ramps to its target."""
    t0, tf = float(raw["t0_s"]), float(raw["tf_s"])
    tau = mesh.state_node_fractions()
    X = np.tile(x_init, (tau.size, 1))
    X[:, 0] = x_init[2] * (tf - t0) * tau
    X[:, 3] = (1.0 - tau) * x_init[3] + tau * gamma_term
    U = np.zeros((mesh.input_node_count, ocp.m))
    h_guess = 0.5 * (float(raw["h_min_lower_ft"]) + float(raw["h_min_upper_ft"]))
    return DecisionData(X=X, U=U, p=np.asarray([h_guess]), t0=t0, tf=tf)
