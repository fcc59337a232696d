"""Dense nonlinear programming by SQP with damped BFGS and an l1 merit line search.

The solver targets desk-scale problems (a few hundred variables) posed as

    minimize    f(v)
    subject to  c_e(v)  = 0
                c_i(v) <= 0
                lower <= v <= upper

All derivatives are central finite differences.  Each iteration solves a
convex QP (exact linearized constraints, damped-BFGS Hessian model, bounds as
native working-set rows) by the dual active-set method in :mod:`.qp`, then
backtracks on the l1 merit function.  If the linearized constraint system is
infeasible, the right-hand sides are progressively relaxed toward the
always-feasible "no worsening" system before giving up.

Objective and constraint rows are scaled by max(1, |value at the initial
point|), and variables by max(1, |initial value|); the reported KKT
stationarity norm refers to this scaled problem, while constraint violations
in the result are re-evaluated from the returned point in original units.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .qp import QpInfeasible, QpNumericalError, solve_qp

__all__ = [
    "NlpProblem",
    "NlpOptions",
    "NlpResult",
    "WarmStart",
    "solve",
    "fd_gradient",
    "fd_jacobian",
]

FD_STEP = float(np.finfo(float).eps ** (1.0 / 3.0))


def fd_gradient(fn: Callable, v: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function.

    The step for component i is ``step * (1 + |v_i|)``.  Raises ValueError if
    any evaluation is non-finite.
    """
    v = np.asarray(v, dtype=float)
    g = np.empty(v.size)
    for i in range(v.size):
        h = step * (1.0 + abs(v[i]))
        vp = v.copy(); vp[i] += h
        vm = v.copy(); vm[i] -= h
        fp = float(fn(vp))
        fm = float(fn(vm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError("non-finite value in finite-difference evaluation")
        g[i] = (fp - fm) / (2.0 * h)
    return g


def fd_jacobian(fn: Callable, v: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of a vector function, shape (len(fn(v)), len(v))."""
    v = np.asarray(v, dtype=float)
    cols = []
    for i in range(v.size):
        h = step * (1.0 + abs(v[i]))
        vp = v.copy(); vp[i] += h
        vm = v.copy(); vm[i] -= h
        fp = np.asarray(fn(vp), dtype=float)
        fm = np.asarray(fn(vm), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise ValueError("non-finite value in finite-difference evaluation")
        cols.append((fp - fm) / (2.0 * h))
    if not cols:
        return np.zeros((np.asarray(fn(v)).size, 0))
    return np.column_stack(cols)


@dataclass
class NlpProblem:
    """Finite-dimensional program; the initial point is clipped into bounds.

    ``objective_residuals``, when given, must be a vector function r with
    objective(v) == sum(r(v)**2); the solver then models the Hessian by
    Gauss-Newton (2 J'J from the residual Jacobian) instead of BFGS, which is
    far more effective on small-residual least-squares objectives.
    """

    dim: int
    objective: Callable
    x0: np.ndarray
    equalities: Callable | None = None
    inequalities: Callable | None = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    objective_residuals: Callable | None = None

    def __post_init__(self):
        self.lower = (np.full(self.dim, -np.inf) if self.lower is None
                      else np.asarray(self.lower, dtype=float))
        self.upper = (np.full(self.dim, np.inf) if self.upper is None
                      else np.asarray(self.upper, dtype=float))
        if self.lower.shape != (self.dim,) or self.upper.shape != (self.dim,):
            raise ValueError("bound vectors must have shape (dim,)")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bounds must not exceed upper bounds")
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if x0.size != self.dim:
            raise ValueError(f"x0 has length {x0.size}, expected {self.dim}")
        self.x0 = np.clip(x0, self.lower, self.upper)

    def eval_equalities(self, v) -> np.ndarray:
        if self.equalities is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.equalities(v), dtype=float))

    def eval_inequalities(self, v) -> np.ndarray:
        if self.inequalities is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.inequalities(v), dtype=float))


@dataclass
class NlpOptions:
    kkt_tolerance: float = 1e-9
    max_iterations: int = 500
    fd_step: float = FD_STEP
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 45
    penalty_init: float = 1.0
    record_history: bool = False

    def __post_init__(self):
        if self.kkt_tolerance <= 0:
            raise ValueError("kkt_tolerance must be positive")


@dataclass
class WarmStart:
    """Primal point plus optional multipliers (defaulting to zero)."""

    x: np.ndarray
    eq_multipliers: np.ndarray | None = None
    ineq_multipliers: np.ndarray | None = None


@dataclass
class NlpResult:
    x: np.ndarray
    objective: float
    max_equality_violation: float
    max_inequality_violation: float
    kkt_stationarity: float
    status: str                      # converged | max_iterations | line_search_failure
    iterations: int
    eq_multipliers: np.ndarray
    ineq_multipliers: np.ndarray
    message: str = ""
    history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def max_violation(self) -> float:
        return max(self.max_equality_violation, self.max_inequality_violation)


def _merit(f: float, ce: np.ndarray, ci: np.ndarray, mu: float) -> float:
    viol = np.abs(ce).sum() + np.clip(ci, 0.0, None).sum()
    return f + mu * viol


def _damped(B: np.ndarray, damping: float) -> np.ndarray:
    """B plus a Levenberg-style multiple of its (floored) diagonal."""
    diag = np.diag(B).copy()
    floor = 1e-8 * max(float(diag.max(initial=0.0)), 1e-30) + 1e-14
    return B + damping * np.diag(np.maximum(diag, floor))


def _damped_bfgs_update(B: np.ndarray, s: np.ndarray, y: np.ndarray,
                        first: bool) -> np.ndarray:
    """Powell-damped BFGS; keeps B positive definite.

    On the first update the identity is rescaled to y'y / s'y (Shanno-Phua),
    which matches the model to the problem's curvature scale.
    """
    sy = float(s @ y)
    if first and sy > 0:
        gamma = float(y @ y) / sy
        if np.isfinite(gamma) and gamma > 0:
            B = gamma * np.eye(s.size)
    Bs = B @ s
    sBs = float(s @ Bs)
    sy = float(s @ y)
    if sBs <= 0:
        return B
    if sy < 0.2 * sBs:
        theta = 0.8 * sBs / (sBs - sy)
        y = theta * y + (1.0 - theta) * Bs
        sy = float(s @ y)
    if sy <= 1e-16 * sBs:
        return B
    return B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / sy


def _least_squares_stationarity(g, Ae, Ai, lam_i, low_mult, up_mult,
                                lb_active, ub_active) -> float:
    """KKT residual with the best multipliers for the current active rows.

    Any multiplier vector that respects the sign and complementarity rules
    certifies stationarity, so the minimum-norm choice gives a sharper
    measure than the QP multipliers (which also absorb the B d term).
    """
    rows = [Ae] if Ae.shape[0] else []
    signs = []
    ineq_rows = np.where(lam_i > 0)[0]
    if ineq_rows.size:
        rows.append(Ai[ineq_rows])
    n = g.size
    lo_rows = np.where(lb_active | (low_mult > 0))[0]
    up_rows = np.where(ub_active | (up_mult > 0))[0]
    bound_block = np.zeros((lo_rows.size + up_rows.size, n))
    for r, i in enumerate(lo_rows):
        bound_block[r, i] = -1.0
    for r, i in enumerate(up_rows):
        bound_block[lo_rows.size + r, i] = 1.0
    if bound_block.shape[0]:
        rows.append(bound_block)
    if not rows:
        return float(np.max(np.abs(g))) if g.size else 0.0
    A = np.vstack(rows)
    lam, *_ = np.linalg.lstsq(A.T, -g, rcond=None)
    # clip sign-constrained multipliers (inequalities and bounds) to >= 0
    n_free = Ae.shape[0]
    lam[n_free:] = np.clip(lam[n_free:], 0.0, None)
    return float(np.max(np.abs(g + A.T @ lam)))


def solve(problem: NlpProblem, options: NlpOptions | None = None,
          warm: WarmStart | None = None) -> NlpResult:
    """Run the SQP iteration; never raises on nonconvergence."""
    opts = options or NlpOptions()
    x_start = problem.x0 if warm is None else np.clip(
        np.asarray(warm.x, dtype=float), problem.lower, problem.upper)

    # --- scaling fixed at the starting point ---
    sv = np.maximum(1.0, np.abs(x_start))
    f0 = float(problem.objective(x_start))
    ce0 = problem.eval_equalities(x_start)
    ci0 = problem.eval_inequalities(x_start)
    if not (np.isfinite(f0) and np.all(np.isfinite(ce0)) and np.all(np.isfinite(ci0))):
        return _failure_result(problem, x_start, "non-finite evaluation at the initial point")
    sf = max(1.0, abs(f0))
    se = np.maximum(1.0, np.abs(ce0))
    si = np.maximum(1.0, np.abs(ci0))
    me, mi = ce0.size, ci0.size

    def fobj(xi):
        return float(problem.objective(xi * sv)) / sf

    def feq(xi):
        return problem.eval_equalities(xi * sv) / se

    def fineq(xi):
        return problem.eval_inequalities(xi * sv) / si

    use_gn = problem.objective_residuals is not None
    sqrt_sf = float(np.sqrt(sf))

    def fres(xi):
        return np.asarray(problem.objective_residuals(xi * sv), dtype=float) / sqrt_sf

    def gn_model(xi):
        """Gradient and raw Gauss-Newton Hessian from the residual Jacobian."""
        r = fres(xi)
        Jr = fd_jacobian(fres, xi, opts.fd_step)
        return 2.0 * (Jr.T @ r), 2.0 * (Jr.T @ Jr)

    lb = problem.lower / sv
    ub = problem.upper / sv
    xi = x_start / sv

    f = f0 / sf
    ce = ce0 / se
    ci = ci0 / si
    damping = 1e-3   # Levenberg-style step control, adapted from line-search success
    try:
        if use_gn:
            g, B = gn_model(xi)
        else:
            g = fd_gradient(fobj, xi, opts.fd_step)
            B = np.eye(problem.dim)
        Ae = fd_jacobian(feq, xi, opts.fd_step) if me else np.zeros((0, xi.size))
        Ai = fd_jacobian(fineq, xi, opts.fd_step) if mi else np.zeros((0, xi.size))
    except ValueError as exc:
        return _failure_result(problem, xi * sv, str(exc))
    mu = opts.penalty_init
    lam_e = np.zeros(me) if warm is None or warm.eq_multipliers is None \
        else np.asarray(warm.eq_multipliers, dtype=float)
    lam_i = np.zeros(mi) if warm is None or warm.ineq_multipliers is None \
        else np.asarray(warm.ineq_multipliers, dtype=float)
    low_mult = np.zeros(problem.dim)
    up_mult = np.zeros(problem.dim)

    status = "max_iterations"
    message = ""
    history: list[dict] = []
    it = 0
    stat_norm = np.inf

    for it in range(1, opts.max_iterations + 1):
        # --- QP subproblem ---
        # Extra damping is a remedy for active-set trouble; relaxing the
        # right-hand sides (beta < 1) is the remedy for infeasible
        # linearizations, down to the always-feasible "no worsening" system.
        qp = None
        for beta in (1.0, 0.5, 0.1, 0.0):
            be = beta * ce
            bi = np.where(ci > 0, beta * ci, ci)
            for extra in (1.0, 1e2, 1e4):
                try:
                    qp = solve_qp(_damped(B, damping * extra), g,
                                  Ae, be, Ai, bi, lb - xi, ub - xi)
                    break
                except QpInfeasible:
                    break
                except QpNumericalError:
                    continue
            if qp is not None:
                break
        if qp is None:
            status, message = "line_search_failure", "QP subproblem infeasible"
            break
        d = qp.d
        lam_e = qp.eq_multipliers
        lam_i = qp.ineq_multipliers
        low_mult = qp.lower_multipliers
        up_mult = qp.upper_multipliers

        grad_lag = g + Ae.T @ lam_e + Ai.T @ lam_i - low_mult + up_mult
        stat_norm = float(np.max(np.abs(grad_lag))) if grad_lag.size else 0.0
        viol_raw = _raw_violation(ce, ci, se, si)
        if stat_norm > opts.kkt_tolerance and viol_raw <= opts.kkt_tolerance:
            bound_tol = 1e-9 * (1.0 + np.abs(xi))
            stat_norm = min(stat_norm, _least_squares_stationarity(
                g, Ae, Ai, lam_i, low_mult, up_mult,
                xi - lb <= bound_tol, ub - xi <= bound_tol))
        if stat_norm <= opts.kkt_tolerance and viol_raw <= opts.kkt_tolerance:
            status = "converged"
            break

        lam_max = max(
            float(np.max(np.abs(lam_e))) if me else 0.0,
            float(np.max(lam_i)) if mi else 0.0,
            float(np.max(low_mult)), float(np.max(up_mult)),
        )
        # keep the penalty above the multipliers, but let it come back down
        # once they shrink, so the merit does not stay violation-dominated
        mu_target = 1.2 * lam_max + 1e-6
        mu = mu_target if mu > 10.0 * mu_target else max(mu, mu_target)

        viol_now = np.abs(ce).sum() + np.clip(ci, 0.0, None).sum()
        viol_pred = (np.abs(ce + Ae @ d).sum() if me else 0.0) \
            + (np.clip(ci + Ai @ d, 0.0, None).sum() if mi else 0.0)
        descent = float(g @ d) - mu * (viol_now - viol_pred)
        if descent > 0.0:
            descent = min(descent, -1e-16)

        phi0 = _merit(f, ce, ci, mu)
        step_norm = float(np.max(np.abs(d))) if d.size else 0.0
        if step_norm <= 1e-15 * (1.0 + float(np.max(np.abs(xi)))):
            status = "line_search_failure"
            message = "stalled: QP step vanished before reaching the KKT tolerance"
            break

        alpha = 1.0
        accepted = False
        for _ in range(opts.max_backtracks):
            trial = xi + alpha * d
            f_t = fobj(trial)
            ce_t = feq(trial)
            ci_t = fineq(trial)
            if np.isfinite(f_t) and np.all(np.isfinite(ce_t)) and np.all(np.isfinite(ci_t)):
                if _merit(f_t, ce_t, ci_t, mu) <= phi0 + opts.armijo * alpha * descent:
                    accepted = True
                    break
            alpha *= opts.backtrack
        if not accepted:
            status = "line_search_failure"
            message = "merit line search failed"
            break

        if opts.record_history:
            history.append({
                "x": (xi * sv).copy(), "merit": phi0,
                "merit_next": _merit(f_t, ce_t, ci_t, mu),
                "mu": mu, "alpha": alpha, "step": step_norm,
                "stationarity": stat_norm, "violation": viol_raw,
            })

        # --- accept step, refresh derivatives, update Hessian model ---
        grad_lag_old = g + Ae.T @ lam_e + Ai.T @ lam_i
        xi_new = trial
        f, ce, ci = f_t, ce_t, ci_t
        if alpha >= 0.5:
            damping = max(1e-10, damping / 3.0)
        elif alpha < 1e-2:
            damping = min(1e6, damping * 10.0)
        else:
            damping = min(1e6, damping * 2.0)
        try:
            if use_gn:
                g, B = gn_model(xi_new)
            else:
                g = fd_gradient(fobj, xi_new, opts.fd_step)
            Ae = fd_jacobian(feq, xi_new, opts.fd_step) if me else Ae
            Ai = fd_jacobian(fineq, xi_new, opts.fd_step) if mi else Ai
        except ValueError as exc:
            xi = xi_new
            status, message = "line_search_failure", str(exc)
            break
        if not use_gn:
            grad_lag_new = g + Ae.T @ lam_e + Ai.T @ lam_i
            s = xi_new - xi
            y = grad_lag_new - grad_lag_old
            B = _damped_bfgs_update(B, s, y, first=(it == 1))
        xi = xi_new

    x = xi * sv
    f_final = float(problem.objective(x))
    ce_raw = problem.eval_equalities(x)
    ci_raw = problem.eval_inequalities(x)
    return NlpResult(
        x=x,
        objective=f_final,
        max_equality_violation=float(np.max(np.abs(ce_raw))) if ce_raw.size else 0.0,
        max_inequality_violation=float(np.max(np.clip(ci_raw, 0.0, None))) if ci_raw.size else 0.0,
        kkt_stationarity=stat_norm,
        status=status,
        iterations=it,
        eq_multipliers=lam_e,
        ineq_multipliers=lam_i,
        message=message,
        history=history,
    )


def _raw_violation(ce, ci, se, si) -> float:
    v_e = float(np.max(np.abs(ce * se))) if ce.size else 0.0
    v_i = float(np.max(np.clip(ci * si, 0.0, None))) if ci.size else 0.0
    return max(v_e, v_i)


def _failure_result(problem: NlpProblem, x: np.ndarray, message: str) -> NlpResult:
    ce = problem.eval_equalities(x)
    ci = problem.eval_inequalities(x)
    fv = float(problem.objective(x))
    return NlpResult(
        x=np.asarray(x, dtype=float),
        objective=fv,
        max_equality_violation=float(np.max(np.abs(ce))) if ce.size else 0.0,
        max_inequality_violation=float(np.max(np.clip(ci, 0.0, None))) if ci.size else 0.0,
        kkt_stationarity=np.inf,
        status="line_search_failure",
        iterations=0,
        eq_multipliers=np.zeros(ce.size),
        ineq_multipliers=np.zeros(ci.size),
        message=message,
    )
