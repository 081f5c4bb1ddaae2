"""Reference LP solver: bounded-variable two-phase primal simplex.

Dense implementation that maintains an explicit basis inverse with periodic
refactorization.  Pricing is Dantzig's rule with an automatic switch to
Bland's rule once a run of degenerate steps is detected, which guarantees
termination.  Row duals and reduced costs come from the final basis and are
checked against the primal objective (strong duality) before an Optimal
status is returned.

Sign conventions for a minimization problem: duals of >= rows are
nonnegative, duals of <= rows nonpositive, equality duals free.
"""
from __future__ import annotations

import numpy as np

from .program import (
    INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution, NumericalFailure,
)

# Column states
_AT_LOWER, _AT_UPPER, _BASIC, _FREE = 0, 1, 2, 3

OPT_TOL = 1e-9          # reduced-cost threshold
RATIO_TOL = 1e-9        # direction entries below this do not block the step
PIVOT_TOL = 1e-11
DEGEN_STEP = 1e-11      # steps this small count toward the cycling heuristic
DEFAULT_MAX_ITER = 10_000
BLAND_AFTER = 40        # consecutive degenerate steps before Bland's rule
REFACTOR_EVERY = 100
DUALITY_REL_TOL = 1e-7  # |primal - dual| <= tol * (1 + |primal|)


def _trivial_bound_solution(lp):
    """Row-free LP: each variable sits at its cost-minimizing bound."""
    n = lp.num_vars
    x = np.zeros(n)
    for j in range(n):
        c, lo, hi = lp.objective[j], lp.lower[j], lp.upper[j]
        if c > OPT_TOL:
            if not np.isfinite(lo):
                return LpSolution(status=UNBOUNDED)
            x[j] = lo
        elif c < -OPT_TOL:
            if not np.isfinite(hi):
                return LpSolution(status=UNBOUNDED)
            x[j] = hi
        else:
            x[j] = lo if np.isfinite(lo) else (hi if np.isfinite(hi) else 0.0)
    return LpSolution(status=OPTIMAL, objective=float(lp.objective @ x), x=x,
                      duals=np.zeros(0), reduced_costs=lp.objective.copy())


def solve_lp(lp: LinearProgram, max_iter: int = DEFAULT_MAX_ITER,
             verify: bool = True) -> LpSolution:
    """Solve an LP, returning primal values, row duals and reduced costs."""
    m, n = lp.num_rows, lp.num_vars
    if np.any(lp.lower > lp.upper + 1e-12):
        return LpSolution(status=INFEASIBLE)
    if m == 0:
        return _trivial_bound_solution(lp)

    # Extended system: structural columns, one slack per inequality row,
    # one artificial per row.  All rows become equalities.
    ineq_rows = [i for i, s in enumerate(lp.senses) if s != "="]
    n_slack = len(ineq_rows)
    ncols = n + n_slack + m
    art_start = n + n_slack

    A = np.zeros((m, ncols))
    A[:, :n] = lp.lhs
    lower = np.full(ncols, 0.0)
    upper = np.full(ncols, np.inf)
    lower[:n] = lp.lower
    upper[:n] = lp.upper
    for k, i in enumerate(ineq_rows):
        A[i, n + k] = 1.0 if lp.senses[i] == "<=" else -1.0

    # Initial nonbasic point: finite lower bound preferred, then finite upper,
    # else zero (free).
    val = np.zeros(ncols)
    status = np.full(ncols, _AT_LOWER, dtype=np.int8)
    for j in range(n):
        if np.isfinite(lower[j]):
            val[j] = lower[j]
        elif np.isfinite(upper[j]):
            val[j] = upper[j]
            status[j] = _AT_UPPER
        else:
            status[j] = _FREE
    # slacks start at zero (their lower bound)

    residual = lp.rhs - A[:, :art_start] @ val[:art_start]
    art_sign = np.where(residual >= 0.0, 1.0, -1.0)
    for i in range(m):
        A[i, art_start + i] = art_sign[i]
        val[art_start + i] = abs(residual[i])
        status[art_start + i] = _BASIC
    basis = np.arange(art_start, art_start + m)
    Binv = np.diag(art_sign)   # inverse of diag(+-1)

    cost1 = np.zeros(ncols)
    cost1[art_start:] = 1.0
    cost2 = np.zeros(ncols)
    cost2[:n] = lp.objective

    iters = 0
    bland = False
    degen_run = 0
    since_refactor = 0

    def refactor():
        nonlocal Binv
        try:
            Binv = np.linalg.inv(A[:, basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis during refactorization") from exc
        nb = np.ones(ncols, dtype=bool)
        nb[basis] = False
        val[basis] = Binv @ (lp.rhs - A[:, nb] @ val[nb])

    def run_phase(cost, phase):
        nonlocal iters, bland, degen_run, since_refactor, Binv
        while True:
            if iters >= max_iter:
                raise NumericalFailure(f"simplex iteration cap {max_iter} exceeded")
            y = cost[basis] @ Binv
            d = cost - y @ A
            span = upper - lower
            movable = (status != _BASIC) & (span > 0)
            enter_up = movable & ((status == _AT_LOWER) | (status == _FREE)) & (d < -OPT_TOL)
            enter_dn = movable & ((status == _AT_UPPER) | (status == _FREE)) & (d > OPT_TOL)
            eligible = enter_up | enter_dn
            if not np.any(eligible):
                return "optimal"
            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                q = int(np.argmax(score))
            direction = 1.0 if enter_up[q] else -1.0

            w = Binv @ A[:, q]
            wdir = direction * w
            # Ratio test: basic variables hit a bound, or the entering
            # variable traverses its own span.
            vB = val[basis]
            lB = lower[basis]
            uB = upper[basis]
            t = np.full(m, np.inf)
            pos = wdir > RATIO_TOL
            neg = wdir < -RATIO_TOL
            with np.errstate(invalid="ignore"):
                t[pos] = (vB[pos] - lB[pos]) / wdir[pos]
                t[neg] = (vB[neg] - uB[neg]) / wdir[neg]
            t[~np.isfinite(t)] = np.inf
            np.maximum(t, 0.0, out=t)
            t_basic = float(np.min(t)) if m else np.inf
            t_span = span[q]

            if not np.isfinite(t_basic) and not np.isfinite(t_span):
                if phase == 1:
                    raise NumericalFailure("phase-1 objective unbounded; data error")
                return "unbounded"

            iters += 1
            if t_span <= t_basic:
                # bound flip, no basis change
                val[q] += direction * t_span
                val[basis] -= wdir * t_span
                status[q] = _AT_UPPER if status[q] == _AT_LOWER else _AT_LOWER
                degen_run = 0
                continue

            cand = np.flatnonzero(t <= t_basic + 1e-12)
            r = int(cand[np.argmin(basis[cand])])
            pivot = w[r]
            if abs(pivot) < PIVOT_TOL:
                refactor()
                continue

            step = t_basic
            val[q] += direction * step
            val[basis] -= wdir * step
            leaving = basis[r]
            if wdir[r] > 0:
                status[leaving] = _AT_LOWER
                val[leaving] = lower[leaving]
            else:
                status[leaving] = _AT_UPPER
                val[leaving] = upper[leaving]
            basis[r] = q
            status[q] = _BASIC

            Binv[r, :] /= pivot
            others = np.arange(m) != r
            Binv[others, :] -= np.outer(w[others], Binv[r, :])

            if step <= DEGEN_STEP:
                degen_run += 1
                if degen_run >= BLAND_AFTER:
                    bland = True
            else:
                degen_run = 0
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                refactor()
                since_refactor = 0

    run_phase(cost1, phase=1)
    phase1_obj = float(val[art_start:].sum())
    feas_scale = 1.0 + float(np.max(np.abs(lp.rhs), initial=0.0))
    if phase1_obj > 1e-7 * feas_scale:
        return LpSolution(status=INFEASIBLE, iterations=iters)

    # Drive artificials out of the basis where possible; pin all of them at 0.
    for i in range(m):
        if basis[i] < art_start:
            continue
        row = Binv[i, :] @ A[:, :art_start]
        pivot_col = -1
        for j in range(art_start):
            if status[j] != _BASIC and abs(row[j]) > 1e-7:
                pivot_col = j
                break
        if pivot_col >= 0:
            w = Binv @ A[:, pivot_col]
            leaving = basis[i]
            basis[i] = pivot_col
            status[pivot_col] = _BASIC
            status[leaving] = _AT_LOWER
            val[leaving] = 0.0
            Binv[i, :] /= w[i]
            others = np.arange(m) != i
            Binv[others, :] -= np.outer(w[others], Binv[i, :])
        else:
            val[basis[i]] = 0.0   # redundant row; artificial stays, fixed at 0
    upper[art_start:] = 0.0
    lower[art_start:] = 0.0

    outcome = run_phase(cost2, phase=2)
    if outcome == "unbounded":
        return LpSolution(status=UNBOUNDED, iterations=iters)

    refactor()
    x = val[:n].copy()
    np.clip(x, lp.lower, lp.upper, out=x)
    y = cost2[basis] @ Binv
    d_all = cost2 - y @ A
    objective = float(lp.objective @ x)

    if verify:
        viol = lp.row_violation(x)
        if viol > 1e-6 * feas_scale:
            raise NumericalFailure(f"primal infeasibility {viol:.3e} after optimality")
        nb = status != _BASIC
        nb_vals = np.where(np.isfinite(val), val, 0.0)
        dual_obj = float(y @ lp.rhs) + float(d_all[nb] @ nb_vals[nb])
        if abs(objective - dual_obj) > DUALITY_REL_TOL * (1.0 + abs(objective)):
            raise NumericalFailure(
                f"duality gap {objective - dual_obj:.3e} exceeds tolerance"
            )

    return LpSolution(
        status=OPTIMAL, objective=objective, x=x, duals=y.copy(),
        reduced_costs=d_all[:n].copy(), iterations=iters,
    )
