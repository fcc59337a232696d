"""Discretization mesh and the discrete decision data living on it.

A mesh divides the normalized horizon tau in [0, 1] into K intervals whose
widths are ``fractions`` (positive, summing to one).  Three fixed-order
schemes are supported:

==================  ==========  ===================  =================
scheme              state nodes collocation points   input nodes
==================  ==========  ===================  =================
euler               K + 1       1 per interval       K (left nodes)
trapezoidal         K + 1       2 per interval       K + 1
hermite_simpson     2K + 1      3 per interval       2K + 1
==================  ==========  ===================  =================

Euler inputs are piecewise constant and stored at left nodes only; the other
schemes share input values at interval endpoints, so the interpolated input
is continuous across intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .ocp import OcpDefinition

__all__ = ["Mesh", "DecisionData", "pack", "unpack", "packed_length"]

SCHEMES = ("euler", "trapezoidal", "hermite_simpson")

_NODES_PER_INTERVAL = {"euler": 2, "trapezoidal": 2, "hermite_simpson": 3}
_COLLOCATION_POINTS = {"euler": 1, "trapezoidal": 2, "hermite_simpson": 3}

FRACTION_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Mesh:
    """Interval fractions plus scheme and residual-quadrature order.

    ``quadrature_order`` is the per-interval Gauss order used when integrating
    squared ODE residuals; it must be at least 4 * (collocation points) + 1,
    which is also the default.
    """

    scheme: str
    fractions: np.ndarray
    quadrature_order: int | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        fractions = np.asarray(self.fractions, dtype=float)
        if fractions.ndim != 1 or fractions.size < 1:
            raise ValueError("fractions must be a nonempty 1-D array")
        if np.any(fractions <= 0):
            raise ValueError("all interval fractions must be positive")
        if abs(fractions.sum() - 1.0) > FRACTION_SUM_TOL:
            raise ValueError("interval fractions must sum to 1")
        object.__setattr__(self, "fractions", fractions)
        min_order = 4 * self.collocation_points_per_interval + 1
        order = min_order if self.quadrature_order is None else int(self.quadrature_order)
        if order < min_order:
            raise ValueError(
                f"quadrature_order must be >= {min_order} for scheme {self.scheme!r}"
            )
        object.__setattr__(self, "quadrature_order", order)

    @classmethod
    def uniform(cls, K: int, scheme: str = "hermite_simpson", quadrature_order=None) -> "Mesh":
        if K < 1:
            raise ValueError("K must be >= 1")
        return cls(scheme=scheme, fractions=np.full(K, 1.0 / K), quadrature_order=quadrature_order)

    @property
    def K(self) -> int:
        return self.fractions.size

    @property
    def nodes_per_interval(self) -> int:
        return _NODES_PER_INTERVAL[self.scheme]

    @property
    def collocation_points_per_interval(self) -> int:
        return _COLLOCATION_POINTS[self.scheme]

    @property
    def state_node_count(self) -> int:
        return 2 * self.K + 1 if self.scheme == "hermite_simpson" else self.K + 1

    @property
    def input_node_count(self) -> int:
        if self.scheme == "euler":
            return self.K
        return self.state_node_count

    def boundaries(self) -> np.ndarray:
        """Interval boundary fractions tau_0 = 0, ..., tau_K = 1 (K+1 values)."""
        out = np.concatenate(([0.0], np.cumsum(self.fractions)))
        out[-1] = 1.0
        return out

    def state_node_fractions(self) -> np.ndarray:
        """Normalized times of all distinct state nodes."""
        b = self.boundaries()
        if self.scheme != "hermite_simpson":
            return b
        out = np.empty(2 * self.K + 1)
        out[0::2] = b
        out[1::2] = 0.5 * (b[:-1] + b[1:])
        return out

    def input_node_fractions(self) -> np.ndarray:
        nodes = self.state_node_fractions()
        return nodes[:-1] if self.scheme == "euler" else nodes

    def interval_state_nodes(self, k: int) -> slice:
        """Indices of interval k's state nodes within the shared node array."""
        step = self.nodes_per_interval - 1
        return slice(step * k, step * k + self.nodes_per_interval)

    def with_quadrature_order(self, order: int) -> "Mesh":
        return replace(self, quadrature_order=order)


@dataclass
class DecisionData:
    """Node values of the discrete solution: Z = (X, U, p, t0, tf).

    ``X`` has shape (state_node_count, n) and ``U`` shape
    (input_node_count, m); shared interval endpoints are stored once.
    """

    X: np.ndarray
    U: np.ndarray
    p: np.ndarray
    t0: float
    tf: float

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.U = np.asarray(self.U, dtype=float)
        self.p = np.asarray(self.p, dtype=float).reshape(-1)
        self.t0 = float(self.t0)
        self.tf = float(self.tf)
        if self.X.ndim != 2 or self.U.ndim != 2:
            raise ValueError("X and U must be 2-D (nodes, dim)")
        if not self.tf > self.t0:
            raise ValueError("tf must exceed t0")

    def validate(self, mesh: Mesh, ocp: OcpDefinition) -> None:
        if self.X.shape != (mesh.state_node_count, ocp.n):
            raise ValueError(
                f"X has shape {self.X.shape}, expected {(mesh.state_node_count, ocp.n)}"
            )
        if self.U.shape != (mesh.input_node_count, ocp.m):
            raise ValueError(
                f"U has shape {self.U.shape}, expected {(mesh.input_node_count, ocp.m)}"
            )
        if self.p.shape != (ocp.s,):
            raise ValueError(f"p has shape {self.p.shape}, expected ({ocp.s},)")

    def copy(self) -> "DecisionData":
        return DecisionData(self.X.copy(), self.U.copy(), self.p.copy(), self.t0, self.tf)

    def state_times(self, mesh: Mesh) -> np.ndarray:
        return self.t0 + (self.tf - self.t0) * mesh.state_node_fractions()

    def input_times(self, mesh: Mesh) -> np.ndarray:
        return self.t0 + (self.tf - self.t0) * mesh.input_node_fractions()


def packed_length(mesh: Mesh, ocp: OcpDefinition) -> int:
    """Length of the flat decision vector for this mesh/problem pair."""
    time_vars = 1 if ocp.time_mode == "free_tf" else 0
    return (
        mesh.state_node_count * ocp.n
        + mesh.input_node_count * ocp.m
        + ocp.s
        + time_vars
    )


def pack(z: DecisionData, mesh: Mesh, ocp: OcpDefinition) -> np.ndarray:
    """Flatten decision data: X node-major, U node-major, p, then tf if free."""
    z.validate(mesh, ocp)
    parts = [z.X.ravel(), z.U.ravel(), z.p]
    if ocp.time_mode == "free_tf":
        parts.append(np.array([z.tf]))
    return np.concatenate(parts) if parts else np.zeros(0)


def unpack(v: np.ndarray, mesh: Mesh, ocp: OcpDefinition, t0: float = 0.0,
           tf: float | None = None) -> DecisionData:
    """Inverse of :func:`pack`.

    ``t0`` is always supplied externally (it is never a decision variable);
    ``tf`` must be supplied when the horizon is fixed and is read from the
    vector when the problem is free-tf.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    expect = packed_length(mesh, ocp)
    if v.size != expect:
        raise ValueError(f"decision vector has length {v.size}, expected {expect}")
    nX = mesh.state_node_count * ocp.n
    nU = mesh.input_node_count * ocp.m
    X = v[:nX].reshape(mesh.state_node_count, ocp.n)
    U = v[nX:nX + nU].reshape(mesh.input_node_count, ocp.m)
    p = v[nX + nU:nX + nU + ocp.s]
    if ocp.time_mode == "free_tf":
        tf_val = v[-1]
    else:
        if tf is None:
            raise ValueError("tf must be supplied for fixed-horizon problems")
        tf_val = tf
    return DecisionData(X=X, U=U, p=p, t0=t0, tf=float(tf_val))
