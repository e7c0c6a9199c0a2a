"""Dense two-phase primal simplex for ``min c.x  s.t.  A x = b, x >= 0``.

Bland's rule selects both the entering column (lowest index with negative
reduced cost) and the leaving row (lowest basic-variable index among ratio
ties), so pivot sequences are fully deterministic and cannot cycle.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NumericalBreakdown

log = logging.getLogger(__name__)

PHASE1_TOL = 1e-9
REDUCED_COST_TOL = 1e-10
PIVOT_TOL = 1e-11
ZERO_TOL = 1e-13
MAX_PIVOTS = 50_000


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        c = np.array(self.objective, dtype=float).ravel()
        A = np.array(self.constraint_matrix, dtype=float)
        b = np.array(self.rhs, dtype=float).ravel()
        if A.ndim != 2:
            raise DimensionMismatch("constraint matrix must be 2-D")
        m, n = A.shape
        if m < 1 or n < 1:
            raise DimensionMismatch("need at least one row and one column")
        if c.shape != (n,) or b.shape != (m,):
            raise DimensionMismatch(
                f"objective has {c.size} entries, rhs {b.size}; matrix is {m}x{n}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        for name, arr in (("objective", c), ("constraint_matrix", A), ("rhs", b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return self.constraint_matrix.shape


@dataclass(frozen=True)
class LpSolution:
    status: Status
    x: np.ndarray | None = None
    objective_value: float = float("nan")
    duals: np.ndarray | None = field(default=None, repr=False)
    basis: tuple = ()
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Tableau:
    """Rows 0..m-1 hold [A | I | b]; columns n..n+m-1 are the artificials."""

    def __init__(self, A, b, verbose):
        m, n = A.shape
        sign = np.where(b < 0, -1.0, 1.0)
        self.m, self.n = m, n
        self.T = np.zeros((m, n + m + 1))
        self.T[:, :n] = A * sign[:, None]
        self.T[:, n : n + m] = np.eye(m)
        self.T[:, -1] = b * sign
        self.basis = list(range(n, n + m))
        self.rows = list(range(m))  # original row index of each tableau row
        self.verbose = verbose
        self.pivots = 0

    def reduced_costs(self, cost):
        cb = cost[self.basis]
        return cost - cb @ self.T[:, :-1]

    def objective(self, cost):
        return float(cost[self.basis] @ self.T[:, -1])

    def pivot(self, r, j):
        T = self.T
        piv = T[r, j]
        if abs(piv) < PIVOT_TOL:
            raise NumericalBreakdown(f"pivot magnitude {abs(piv):.3e} at row {r}, column {j}")
        T[r] /= piv
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[np.abs(T) < ZERO_TOL] = 0.0
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise NumericalBreakdown("pivot limit exceeded")
        if self.verbose:
            log.debug("pivot %d: row %d col %d\n%s", self.pivots, r, j, np.array2string(T, precision=4))

    def run(self, cost, allowed):
        """Iterate Bland pivots on ``cost`` over columns flagged in ``allowed``.

        Returns False when the program is unbounded in some allowed column.
        """
        while True:
            d = self.reduced_costs(cost)
            candidates = np.flatnonzero(allowed & (d < -REDUCED_COST_TOL))
            if candidates.size == 0:
                return True
            j = int(candidates[0])
            col = self.T[:, j]
            positive = col > PIVOT_TOL
            if not positive.any():
                if (col > 0).any():
                    raise NumericalBreakdown(f"column {j} has only sub-tolerance positive entries")
                return False
            ratios = np.full(self.m, np.inf)
            ratios[positive] = self.T[positive, -1] / col[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
            r = min(ties, key=lambda i: self.basis[i])
            self.pivot(int(r), j)

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis; drop rows that are redundant."""
        n = self.n
        r = 0
        while r < len(self.basis):
            if self.basis[r] >= n:
                row = self.T[r, :n]
                nz = np.flatnonzero(np.abs(row) > PHASE1_TOL)
                if nz.size:
                    j = int(nz[np.argmax(np.abs(row[nz]))])
                    self.pivot(r, j)
                else:
                    self.T = np.delete(self.T, r, axis=0)
                    del self.basis[r]
                    del self.rows[r]
                    self.m -= 1
                    continue
            r += 1


def _phase_one(lp: LinearProgram, verbose: bool):
    A, b = lp.constraint_matrix, lp.rhs
    m, n = A.shape
    tab = _Tableau(A, b, verbose)
    cost = np.zeros(n + m)
    cost[n:] = 1.0
    allowed = np.ones(n + m, dtype=bool)
    tab.run(cost, allowed)
    infeasibility = tab.objective(cost)
    if infeasibility > PHASE1_TOL:
        log.debug("phase 1 infeasibility %.3e", infeasibility)
        return tab, False
    tab.drive_out_artificials()
    return tab, True


def _primal(tab: _Tableau, n: int) -> np.ndarray:
    x = np.zeros(n)
    for r, j in enumerate(tab.basis):
        if j < n:
            x[j] = tab.T[r, -1]
    x[(x < 0) & (x > -1e-9)] = 0.0
    return x


def _duals(lp: LinearProgram, basis, x) -> np.ndarray:
    A = lp.constraint_matrix
    cols = [j for j in basis if j < A.shape[1]]
    if not cols:
        return np.zeros(A.shape[0])
    y, *_ = np.linalg.lstsq(A[:, cols].T, lp.objective[cols], rcond=None)
    return y


def solve(lp: LinearProgram, verbose: bool = False) -> LpSolution:
    m, n = lp.shape
    tab, feasible = _phase_one(lp, verbose)
    if not feasible:
        return LpSolution(Status.INFEASIBLE, pivots=tab.pivots)
    cost = np.concatenate([lp.objective, np.zeros(m)])
    allowed = np.zeros(n + m, dtype=bool)
    allowed[:n] = True
    if not tab.run(cost, allowed):
        return LpSolution(Status.UNBOUNDED, pivots=tab.pivots)
    x = _primal(tab, n)
    return LpSolution(
        Status.OPTIMAL,
        x=x,
        objective_value=float(lp.objective @ x),
        duals=_duals(lp, tab.basis, x),
        basis=tuple(tab.basis),
        pivots=tab.pivots,
    )


def feasibility(constraint_matrix, rhs, verbose: bool = False) -> LpSolution:
    """Phase-1-only entry point. Status is OPTIMAL (feasible, with witness) or INFEASIBLE."""
    A = np.asarray(constraint_matrix, dtype=float)
    lp = LinearProgram(np.zeros(A.shape[1] if A.ndim == 2 else 0), A, rhs)
    tab, feasible = _phase_one(lp, verbose)
    if not feasible:
        return LpSolution(Status.INFEASIBLE, pivots=tab.pivots)
    x = _primal(tab, lp.shape[1])
    return LpSolution(Status.OPTIMAL, x=x, objective_value=0.0, basis=tuple(tab.basis), pivots=tab.pivots)
