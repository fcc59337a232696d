"""Gauss-Legendre quadrature rules on [-1, 1].

Nodes are the roots of the Legendre polynomial P_n, found by Newton's method
from the Chebyshev-like initial guess cos(pi (i - 1/4) / (n + 1/2)); weights
are 2 / ((1 - x^2) P_n'(x)^2).  A rule of order n integrates polynomials of
degree <= 2n - 1 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["QuadratureRule", "gauss_legendre"]

MAX_ORDER = 64
_NEWTON_TOL = 1e-15


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights affinely transported to the interval [a, b]."""
        half = 0.5 * (b - a)
        return half * self.nodes + 0.5 * (a + b), half * self.weights


def _legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def _gauss_legendre_cached(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    if n == 1:
        return (0.0,), (2.0,)
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) <= _NEWTON_TOL:
            break
    # enforce exact symmetry about zero, then ascending order
    x = 0.5 * (x - x[::-1])
    if n % 2 == 1:
        x[n // 2] = 0.0
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    order = np.argsort(x)
    return tuple(x[order]), tuple(w[order])


def gauss_legendre(n: int) -> QuadratureRule:
    """Gauss-Legendre rule of order ``n`` (1 <= n <= 64) on [-1, 1]."""
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"quadrature order must be in [1, {MAX_ORDER}], got {n}")
    nodes, weights = _gauss_legendre_cached(int(n))
    return QuadratureRule(order=int(n), nodes=np.array(nodes), weights=np.array(weights))
