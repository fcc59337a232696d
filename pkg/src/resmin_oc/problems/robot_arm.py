"""Minimum-time two-link robot arm benchmark.

Two identical actuated beams carry a payload; the task is to swing the
payload to a prescribed geometry in minimum time with a small input-energy
regularization:

    minimize tf + w * int (u1^2 + u2^2) dt.

States are the shoulder rate omega_phi, the second link's absolute rate
omega_psi, the shoulder angle phi and the inter-link angle chi; both
nondimensionalized torques are bounded by 1 in magnitude.  All model
coefficients and boundary values are loaded from the versioned parameter
file ``data/robot_arm.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..mesh import Mesh
from ..ocp import OcpDefinition
from ..transcription import straight_line_guess

__all__ = ["RobotArmParams", "load_robot_arm_params", "two_link_robot_arm"]

_REQUIRED_KEYS = (
    "beam_mass_kg", "beam_length_m", "payload_mass_kg", "control_weight",
    "inertia_bias", "sin_sq_gain", "omega_phi_eq", "omega_psi_eq",
    "initial_state", "terminal_state", "u_lower", "u_upper",
    "t0", "tf_lower", "tf_upper",
)


@dataclass(frozen=True)
class RobotArmParams:
    beam_mass: float
    beam_length: float
    payload_mass: float
    control_weight: float
    terminal_chi: float
    terminal_phi: float
    raw: dict

    def __post_init__(self):
        if min(self.beam_mass, self.beam_length, self.payload_mass) <= 0:
            raise ValueError("masses and length must be positive")


def load_robot_arm_params(path=None) -> RobotArmParams:
    """Load and validate the parameter file (default: the packaged one)."""
    try:
        if path is None:
            text = resources.files("resmin_oc.problems").joinpath(
                "data/robot_arm.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"robot arm parameter file could not be loaded: {exc}") from exc
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ValueError(f"robot arm parameter file is missing keys: {missing}")
    if len(raw["initial_state"]) != 4 or len(raw["terminal_state"]) != 4:
        raise ValueError("robot arm boundary states must have 4 entries")
    return RobotArmParams(
        beam_mass=float(raw["beam_mass_kg"]),
        beam_length=float(raw["beam_length_m"]),
        payload_mass=float(raw["payload_mass_kg"]),
        control_weight=float(raw["control_weight"]),
        terminal_chi=float(raw["terminal_state"][3]),
        terminal_phi=float(raw["terminal_state"][2]),
        raw=raw,
    )


def two_link_robot_arm(K: int = 10, scheme: str = "hermite_simpson", params_path=None):
    """Return (OcpDefinition, Mesh, initial guess) for the benchmark."""
    params = load_robot_arm_params(params_path)
    raw = params.raw
    bias = float(raw["inertia_bias"])
    gain = float(raw["sin_sq_gain"])
    c_phi = raw["omega_phi_eq"]
    c_psi = raw["omega_psi_eq"]
    a1, a2, a3, a4 = (float(c_phi[k]) for k in
                      ("cos_omega_phi_sq", "omega_psi_sq", "torque_diff", "cos_torque2"))
    b1, b2, b3, b4 = (float(c_psi[k]) for k in
                      ("omega_phi_sq", "cos_omega_psi_sq", "torque2", "cos_torque_diff"))
    weight = params.control_weight
    x_init = np.asarray(raw["initial_state"], dtype=float)
    x_term = np.asarray(raw["terminal_state"], dtype=float)

    def dynamics(x, u, t, p):
        w_phi, w_psi, chi = x[0], x[1], x[3]
        sin_chi, cos_chi = np.sin(chi), np.cos(chi)
        den = bias + gain * sin_chi ** 2
        dw_phi = (sin_chi * (a1 * cos_chi * w_phi ** 2 + a2 * w_psi ** 2)
                  + a3 * (u[0] - u[1]) - a4 * cos_chi * u[1]) / den
        dw_psi = -(sin_chi * (b1 * w_phi ** 2 + b2 * cos_chi * w_psi ** 2)
                   - b3 * u[1] + b4 * cos_chi * (u[0] - u[1])) / den
        return np.asarray([dw_phi, dw_psi, w_phi, w_psi - w_phi])

    def lagrange(x, u, t, p):
        return weight * (u[0] ** 2 + u[1] ** 2)

    def mayer(x0, t0, xf, tf, p):
        return tf

    def boundary(x0, t0, xf, tf, p):
        return np.concatenate([x0 - x_init, xf - x_term])

    ocp = OcpDefinition(
        n=4, m=2, n_q=8,
        dynamics=dynamics,
        lagrange_cost=lagrange,
        mayer_cost=mayer,
        boundary=boundary,
        u_lower=np.asarray(raw["u_lower"], dtype=float),
        u_upper=np.asarray(raw["u_upper"], dtype=float),
        tf_lower=float(raw["tf_lower"]),
        tf_upper=float(raw["tf_upper"]),
        time_mode="free_tf",
        vectorized=True,
        name="robot_arm",
    )
    mesh = Mesh.uniform(K, scheme)
    guess = straight_line_guess(ocp, mesh, x_init, x_term, t0=float(raw["t0"]))
    return ocp, mesh, guess
