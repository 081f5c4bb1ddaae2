"""Optional adapter backing the solver contract with scipy's HiGHS wrappers.

Used as the independent cross-check oracle for the reference simplex and as
the workhorse for the larger extensive forms, where a pure-Python simplex
would be needlessly slow.  Duals are remapped to the package convention
(>= rows nonnegative, <= rows nonpositive, minimization).
"""
from __future__ import annotations

import numpy as np
from scipy import optimize as sciopt

from .program import (
    INFEASIBLE, NODE_CAP, OPTIMAL, UNBOUNDED, LpSolution, MipSolution,
    NumericalFailure,
)


def _split_rows(lp):
    """Partition rows into (A_ub, b_ub, ub_map) and (A_eq, b_eq, eq_map).

    >= rows are negated into <= form; ub_map records (row index, sign) so the
    marginals can be mapped back.
    """
    A_ub, b_ub, ub_map = [], [], []
    A_eq, b_eq, eq_map = [], [], []
    for i, sense in enumerate(lp.senses):
        if sense == "=":
            A_eq.append(lp.lhs[i])
            b_eq.append(lp.rhs[i])
            eq_map.append(i)
        elif sense == "<=":
            A_ub.append(lp.lhs[i])
            b_ub.append(lp.rhs[i])
            ub_map.append((i, 1.0))
        else:
            A_ub.append(-lp.lhs[i])
            b_ub.append(-lp.rhs[i])
            ub_map.append((i, -1.0))
    return (A_ub, b_ub, ub_map), (A_eq, b_eq, eq_map)


def solve_lp(lp, max_iter=None) -> LpSolution:
    (A_ub, b_ub, ub_map), (A_eq, b_eq, eq_map) = _split_rows(lp)
    bounds = list(zip(lp.lower, lp.upper))
    res = sciopt.linprog(
        c=lp.objective,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return LpSolution(status=INFEASIBLE)
    if res.status == 3:
        return LpSolution(status=UNBOUNDED)
    if res.status != 0:
        raise NumericalFailure(f"linprog failed: {res.message}")
    duals = np.zeros(lp.num_rows)
    for k, (i, sign) in enumerate(ub_map):
        duals[i] = sign * res.ineqlin.marginals[k]
    for k, i in enumerate(eq_map):
        duals[i] = res.eqlin.marginals[k]
    reduced = res.lower.marginals + res.upper.marginals
    iters = int(getattr(res, "nit", 0) or 0)
    return LpSolution(status=OPTIMAL, objective=float(res.fun), x=res.x.copy(),
                      duals=duals, reduced_costs=reduced, iterations=iters)


def solve_mip(mip, gap_tol=0.0, node_cap=100_000) -> MipSolution:
    lp = mip.lp
    is_le = np.array([s == "<=" for s in lp.senses], dtype=bool)
    is_ge = np.array([s == ">=" for s in lp.senses], dtype=bool)
    lb = np.where(is_le, -np.inf, lp.rhs)
    ub = np.where(is_ge, np.inf, lp.rhs)
    lower = np.maximum(lp.lower, np.where(mip.binary, 0.0, lp.lower))
    upper = np.minimum(lp.upper, np.where(mip.binary, 1.0, lp.upper))
    constraints = (
        [sciopt.LinearConstraint(lp.lhs, lb, ub)] if lp.num_rows else []
    )
    res = sciopt.milp(
        c=lp.objective,
        constraints=constraints,
        integrality=mip.binary.astype(int),
        bounds=sciopt.Bounds(lower, upper),
        options={"mip_rel_gap": float(gap_tol), "node_limit": int(node_cap)},
    )
    if res.status == 2:
        return MipSolution(status=INFEASIBLE)
    if res.status == 3:
        return MipSolution(status=UNBOUNDED)
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.status == 1:   # iteration / node limit
        bound = getattr(res, "mip_dual_bound", None)
        if res.x is None:
            return MipSolution(status=NODE_CAP, bound=bound, nodes=nodes)
        x = _snap(res.x, mip.binary)
        return MipSolution(status=NODE_CAP, objective=float(lp.objective @ x), x=x,
                           bound=bound, nodes=nodes)
    if res.status != 0 or res.x is None:
        raise NumericalFailure(f"milp failed: {res.message}")
    x = _snap(res.x, mip.binary)
    obj = float(lp.objective @ x)
    return MipSolution(status=OPTIMAL, objective=obj, x=x, bound=obj, nodes=nodes)


def _snap(x, binary):
    x = np.asarray(x, dtype=float).copy()
    x[binary] = np.round(x[binary])
    return x
