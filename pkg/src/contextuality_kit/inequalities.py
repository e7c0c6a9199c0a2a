"""CHSH, CHSH with signaling correction, joint-distribution oracle, n-cycle bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import lp
from .errors import EvenNegativeSigns, SignalingInput
from .estimation import SignalingReport, signaling_deltas
from .probability import (
    CHSH_CONTEXTS,
    CyclicSystem,
    JointDistribution,
    outcome_table,
)

VERDICT_TOL = 1e-9
SIGNALING_TOL = 1e-9
TSIRELSON = 2 * math.sqrt(2)


@dataclass(frozen=True)
class ChshReport:
    values: tuple
    s_max: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {"values": list(self.values), "s_max": self.s_max, "satisfied": self.satisfied}


@dataclass(frozen=True)
class BdkReport:
    lhs: float
    delta0: float
    contextual: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "delta0": self.delta0, "contextual": self.contextual}


@dataclass(frozen=True)
class FineResult:
    feasible: bool
    witness: JointDistribution | None = None

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "witness": None if self.witness is None else [float(p) for p in self.witness.probs],
        }


def _one_minus_sums(corr: np.ndarray) -> np.ndarray:
    # |sum - 2 c_k| is the sum with only context k negated
    return np.abs(corr.sum() - 2 * corr)


def chsh(system: CyclicSystem) -> ChshReport:
    values = _one_minus_sums(system.correlations())
    s_max = float(values.max())
    return ChshReport(tuple(float(v) for v in values), s_max, s_max <= 2 + VERDICT_TOL)


def bdk(system: CyclicSystem, report: SignalingReport | None = None) -> BdkReport:
    """CHSH bound corrected for signaling: max_ij |S - 2 c_ij| - 2 delta0 <= 2."""
    if report is None:
        report = signaling_deltas(system)
    lhs = float(_one_minus_sums(system.correlations()).max())
    return BdkReport(lhs, report.delta0, lhs - 2 * report.delta0 > 2 + VERDICT_TOL)


# atoms over (a1, a2, b1, b2)
_QUAD = outcome_table(4)


def jpd_constraints(system: CyclicSystem) -> tuple[np.ndarray, np.ndarray]:
    """Normalization, the four single means and the four (a_i, b_j) product moments."""
    rows = [np.ones(16)]
    rhs = [1.0]
    a = {1: _QUAD[:, 0], 2: _QUAD[:, 1]}
    b = {1: _QUAD[:, 2], 2: _QUAD[:, 3]}
    for i in (1, 2):
        rows.append(a[i])
        rhs.append(0.5 * (system[(i, 1)].mean_a + system[(i, 2)].mean_a))
    for j in (1, 2):
        rows.append(b[j])
        rhs.append(0.5 * (system[(1, j)].mean_b + system[(2, j)].mean_b))
    for i, j in CHSH_CONTEXTS:
        rows.append(a[i] * b[j])
        rhs.append(system[(i, j)].corr)
    return np.array(rows), np.array(rhs)


def jpd_feasible(system: CyclicSystem, verbose: bool = False) -> FineResult:
    """Decide whether one distribution over (a1, a2, b1, b2) reproduces all four contexts."""
    delta0 = signaling_deltas(system).delta0
    if delta0 > SIGNALING_TOL:
        raise SignalingInput(f"marginals are inconsistent (delta0 = {delta0:.3e})")
    A, b = jpd_constraints(system)
    sol = lp.feasibility(A, b, verbose=verbose)
    if not sol.optimal:
        return FineResult(False)
    x = np.clip(sol.x, 0.0, None)
    return FineResult(True, JointDistribution(4, x / x.sum()))


def tsirelson_check(s_max: float) -> bool:
    if s_max < 0:
        raise ValueError("s_max must be nonnegative")
    return s_max <= TSIRELSON + VERDICT_TOL


@dataclass(frozen=True)
class NCycleResult:
    value: float
    bound: int
    satisfied: bool


def ncycle_evaluate(correlations: Sequence[float], signs: Sequence[int]) -> NCycleResult:
    """|sum_k signs[k] * corr[k]| against the n-cycle bound n - 2.

    Only sign patterns with an odd number of -1 entries belong to this family.
    """
    corr = np.asarray(correlations, dtype=float)
    signs = np.asarray(signs, dtype=int)
    n = corr.size
    if n < 3:
        raise ValueError("n-cycle needs n >= 3")
    if signs.shape != corr.shape or not np.all(np.isin(signs, (-1, 1))):
        raise ValueError("signs must be n values in {-1, +1}")
    if np.count_nonzero(signs == -1) % 2 == 0:
        raise EvenNegativeSigns("number of negative signs must be odd")
    value = float(abs(signs @ corr))
    return NCycleResult(value, n - 2, value <= n - 2 + VERDICT_TOL)


def ncycle_max(correlations: Sequence[float]) -> float:
    """Largest n-cycle expression over all odd sign patterns."""
    corr = np.asarray(correlations, dtype=float)
    # best odd pattern: all signs follow corr, then flip the smallest |c| if parity is even
    signs = np.where(corr >= 0, 1, -1)
    total = np.abs(corr).sum()
    if np.count_nonzero(signs == -1) % 2 == 0:
        total -= 2 * np.abs(corr).min()
    return float(total)
