"""Dense convex quadratic programming by a dual active-set method.

Solves

    minimize    0.5 d' G d + g' d
    subject to  A_e d + b_e  = 0
                A_i d + b_i <= 0
                lb <= d <= ub

with G symmetric positive definite.  The method starts from the
equality-constrained minimizer (one KKT solve with every equality row active)
and then adds violated inequality/bound rows one at a time, taking combined
primal-dual steps and dropping blocking rows whose multipliers hit zero --
the classical dual strategy of Goldfarb and Idnani.  Because the dual start
needs no phase-1, the solver either returns the exact optimizer or raises
`QpInfeasible`.

Bounds are kept as explicit unit-normal rows of the working set, so every
returned step satisfies them exactly.  All factorizations are dense; the
intended problem sizes are a few hundred variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QpResult", "QpInfeasible", "solve_qp"]


class QpInfeasible(RuntimeError):
    """The constraint system admits no feasible point."""


class QpNumericalError(RuntimeError):
    """The active-set iteration failed to make progress."""


@dataclass
class QpResult:
    d: np.ndarray
    eq_multipliers: np.ndarray      # for rows A_e d + b_e = 0 (free sign)
    ineq_multipliers: np.ndarray    # for rows A_i d + b_i <= 0 (>= 0)
    lower_multipliers: np.ndarray   # for d >= lb (>= 0)
    upper_multipliers: np.ndarray   # for d <= ub (>= 0)
    iterations: int


def _chol_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y)


def _factor_spd(M: np.ndarray) -> np.ndarray:
    """Cholesky with escalating diagonal regularization."""
    dim = M.shape[0]
    if dim == 0:
        return np.zeros((0, 0))
    shift = 0.0
    base = max(np.trace(M) / dim, 1.0)
    for _ in range(12):
        try:
            return np.linalg.cholesky(M + shift * np.eye(dim))
        except np.linalg.LinAlgError:
            shift = max(2.0 * shift, 1e-14 * base)
    raise QpNumericalError("matrix could not be factorized as SPD")


def solve_qp(G, g, A_e=None, b_e=None, A_i=None, b_i=None, lb=None, ub=None,
             feas_tol: float = 1e-11, max_iter: int | None = None) -> QpResult:
    """Solve the convex QP described in the module docstring."""
    G = np.asarray(G, dtype=float)
    g = np.asarray(g, dtype=float)
    n = g.size
    A_e = np.zeros((0, n)) if A_e is None else np.asarray(A_e, dtype=float).reshape(-1, n)
    b_e = np.zeros(A_e.shape[0]) if b_e is None else np.asarray(b_e, dtype=float)
    A_i = np.zeros((0, n)) if A_i is None else np.asarray(A_i, dtype=float).reshape(-1, n)
    b_i = np.zeros(A_i.shape[0]) if b_i is None else np.asarray(b_i, dtype=float)
    lb = np.full(n, -np.inf) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    me, mi = A_e.shape[0], A_i.shape[0]

    # Inequalities in "normal' d >= rhs" form: general rows, then lower and
    # upper bound rows (infinite bounds are skipped via the finite mask).
    # row j < mi:            -A_i[j] d >= b_i[j]
    # row mi + i:             e_i d   >= lb[i]
    # row mi + n + i:        -e_i d   >= -ub[i]
    n_ineq_rows = mi + 2 * n

    def normal(row: int) -> np.ndarray:
        if row < mi:
            return -A_i[row]
        e = np.zeros(n)
        if row < mi + n:
            e[row - mi] = 1.0
        else:
            e[row - mi - n] = -1.0
        return e

    rhs = np.concatenate([b_i, lb, -ub])
    usable = np.isfinite(rhs)

    L = _factor_spd(G)

    # Start from the equality-constrained minimizer with all equalities active.
    Gi_g = _chol_solve(L, g)
    if me:
        Ninv_e = _chol_solve(L, A_e.T)                       # G^{-1} A_e'
        M = A_e @ Ninv_e
        Lm = _factor_spd(M)
        u_eq = _chol_solve(Lm, -b_e - A_e @ (-Gi_g))
        d = -Gi_g + Ninv_e @ u_eq
        eq_residual = A_e @ d + b_e
        if np.max(np.abs(eq_residual)) > 1e-6 * (1.0 + np.max(np.abs(b_e))):
            raise QpInfeasible("equality rows are inconsistent")
    else:
        Ninv_e = np.zeros((n, 0))
        u_eq = np.zeros(0)
        d = -Gi_g

    active: list[int] = []          # inequality-row indices in the working set
    u_act: list[float] = []
    Ninv_a = np.zeros((n, 0))       # G^{-1} normals of the active inequality rows

    scale = 1.0 + float(np.max(np.abs(rhs[usable]))) if usable.any() else 1.0
    tol = feas_tol * scale
    limit = max_iter if max_iter is not None else 50 * (me + n_ineq_rows + 10)

    def slack_all() -> np.ndarray:
        s = np.full(n_ineq_rows, np.inf)
        if mi:
            s[:mi] = -(A_i @ d + b_i)
        s[mi:mi + n] = d - lb
        s[mi + n:] = ub - d
        s[~usable] = np.inf
        return s

    iters = 0
    while True:
        s = slack_all()
        if active:
            s[np.array(active)] = np.inf  # active rows are satisfied by construction
        p = int(np.argmin(s))
        if s[p] >= -tol:
            break

        n_p = normal(p)
        Gi_np = _chol_solve(L, n_p)
        u_p = 0.0
        while True:
            iters += 1
            if iters > limit:
                raise QpNumericalError("active-set iteration limit exceeded")
            N_all = np.concatenate([Ninv_e, Ninv_a], axis=1)
            na = N_all.shape[1]
            if na:
                A_all = np.vstack([A_e] + [normal(j)[None, :] for j in active]) \
                    if active else A_e
                M = A_all @ N_all
                Lm = _factor_spd(M)
                r_vec = _chol_solve(Lm, A_all @ Gi_np)
                z = Gi_np - N_all @ r_vec
            else:
                r_vec = np.zeros(0)
                z = Gi_np

            # Maximum dual step before an active inequality multiplier hits 0.
            t1 = np.inf
            drop_j = -1
            for idx, row in enumerate(active):
                r_j = r_vec[me + idx]
                if r_j > 1e-13:
                    ratio = u_act[idx] / r_j
                    if ratio < t1:
                        t1, drop_j = ratio, idx

            zn = float(z @ n_p)
            s_p = float(n_p @ d - rhs[p])
            t2 = np.inf if zn <= 1e-13 * (1.0 + float(np.abs(Gi_np @ n_p))) else -s_p / zn

            if not np.isfinite(t1) and not np.isfinite(t2):
                raise QpInfeasible("no primal or dual step possible")
            t = min(t1, t2)

            if np.isfinite(t2):
                d = d + t * z
            if na:
                u_eq = u_eq - t * r_vec[:me]
                for idx in range(len(active)):
                    u_act[idx] -= t * r_vec[me + idx]
            u_p += t

            if t == t2:
                active.append(p)
                u_act.append(u_p)
                Ninv_a = np.concatenate([Ninv_a, Gi_np[:, None]], axis=1)
                break
            # blocking multiplier hit zero: drop that row and retry
            active.pop(drop_j)
            u_act.pop(drop_j)
            Ninv_a = np.delete(Ninv_a, drop_j, axis=1)

    ineq_mult = np.zeros(mi)
    lower_mult = np.zeros(n)
    upper_mult = np.zeros(n)
    for row, u in zip(active, u_act):
        if row < mi:
            ineq_mult[row] = u
        elif row < mi + n:
            lower_mult[row - mi] = u
        else:
            upper_mult[row - mi - n] = u
    # Stationarity uses G d + g - sum u_j n_j = 0; in the <=-form convention the
    # equality multiplier enters with flipped sign.
    return QpResult(
        d=d,
        eq_multipliers=-u_eq,
        ineq_multipliers=ineq_mult,
        lower_multipliers=lower_mult,
        upper_multipliers=upper_mult,
        iterations=iters,
    )
