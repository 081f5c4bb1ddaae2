"""Matrix-form programs and solution records shared by all backends."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SENSES = ("<=", "=", ">=")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NODE_CAP = "node_cap"


class NumericalFailure(RuntimeError):
    """The solver could not certify its answer within tolerances."""


@dataclass
class LinearProgram:
    """min objective'x  s.t.  lhs x {<=,=,>=} rhs,  lower <= x <= upper.

    Dense data; senses is a per-row sequence drawn from SENSES.  Bounds may be
    -inf/+inf.
    """

    objective: np.ndarray
    lhs: np.ndarray
    senses: list
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.lhs = np.asarray(self.lhs, dtype=float)
        if self.lhs.ndim == 1:
            self.lhs = self.lhs.reshape(1, -1)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.senses = list(self.senses)
        m, n = self.lhs.shape if self.lhs.size else (len(self.senses), self.objective.shape[0])
        if self.lhs.size == 0:
            self.lhs = self.lhs.reshape(m, n)
        if self.objective.shape != (n,):
            raise ValueError(f"objective shape {self.objective.shape} != ({n},)")
        if self.rhs.shape != (m,):
            raise ValueError(f"rhs shape {self.rhs.shape} != ({m},)")
        if len(self.senses) != m:
            raise ValueError(f"{len(self.senses)} senses for {m} rows")
        for s in self.senses:
            if s not in SENSES:
                raise ValueError(f"unknown sense {s!r}")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound vectors must match the variable count")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective must be finite")
        if not (np.all(np.isfinite(self.lhs)) and np.all(np.isfinite(self.rhs))):
            raise ValueError("constraint data must be finite")

    @property
    def num_vars(self):
        return self.objective.shape[0]

    @property
    def num_rows(self):
        return self.rhs.shape[0]

    def row_violation(self, x, tol=0.0):
        """Largest constraint/bound violation at x (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if self.num_rows:
            act = self.lhs @ x
            for i, sense in enumerate(self.senses):
                if sense == "<=":
                    worst = max(worst, act[i] - self.rhs[i])
                elif sense == ">=":
                    worst = max(worst, self.rhs[i] - act[i])
                else:
                    worst = max(worst, abs(act[i] - self.rhs[i]))
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.upper, initial=0.0)))
        return worst


@dataclass
class LpSolution:
    """LP result.  When optimal, duals follow the minimization convention:

    >= rows have duals >= 0, <= rows duals <= 0, = rows free; the dual
    objective rhs'y plus bound terms matches the primal objective.
    """

    status: str
    objective: float | None = None
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0

    @property
    def is_optimal(self):
        return self.status == OPTIMAL


@dataclass
class MixedBinaryProgram:
    """An LP plus a per-variable binary flag (binaries live in {0,1})."""

    lp: LinearProgram
    binary: np.ndarray

    def __post_init__(self):
        self.binary = np.asarray(self.binary, dtype=bool)
        if self.binary.shape != (self.lp.num_vars,):
            raise ValueError("binary mask must match the variable count")


@dataclass
class MipSolution:
    status: str
    objective: float | None = None   # incumbent value
    x: np.ndarray | None = None
    bound: float | None = None       # proven lower bound (minimization)
    nodes: int = 0
    iterations: int = 0              # total LP iterations across nodes

    @property
    def is_optimal(self):
        return self.status == OPTIMAL


@dataclass
class SolveStats:
    """Deterministic effort counters accumulated by a backend handle."""

    lp_solves: int = 0
    mip_solves: int = 0
    lp_iterations: int = 0
    nodes: int = 0

    def as_dict(self):
        return {
            "lp_solves": self.lp_solves,
            "mip_solves": self.mip_solves,
            "lp_iterations": self.lp_iterations,
            "nodes": self.nodes,
        }


class Backend:
    """Backend contract: stateless solve calls plus effort counters.

    Implementations must be deterministic (identical inputs give identical
    outputs) and safe to call from multiple threads.
    """

    name = "abstract"

    def __init__(self):
        self.stats = SolveStats()

    def solve_lp(self, lp: LinearProgram) -> LpSolution:
        raise NotImplementedError

    def solve_mip(self, mip: MixedBinaryProgram, gap_tol: float = 0.0,
                  node_cap: int = 100_000) -> MipSolution:
        raise NotImplementedError
