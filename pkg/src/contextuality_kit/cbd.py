"""Contextuality-by-Default analysis of the CHSH system.

Each observable gets one random variable per context, giving the octuple
(A11, B11, A12, B21, A21, B12, A22, B22): A_ij is a_i measured with b_j and
B_ji is b_j measured with a_i. A coupling is any distribution over the 256
atoms of the octuple whose per-context pairs reproduce the observed moments.
The minimum total probability that same-named copies disagree, compared with
the smallest value the marginals alone force, measures genuine contextuality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import InvalidDistribution, NumericalBreakdown
from .estimation import signaling_deltas
from .probability import (
    CHSH_CONTEXTS,
    CyclicSystem,
    JointDistribution,
    cells_from_stats,
    marginal,
    outcome_table,
)

OCTUPLE_LABELS = ("A11", "B11", "A12", "B21", "A21", "B12", "A22", "B22")

# positions of (A_ij, B_ji) for context (i, j)
CONTEXT_POSITIONS = {(1, 1): (0, 1), (1, 2): (2, 3), (2, 1): (4, 5), (2, 2): (6, 7)}

# the two copies of a1, a2, b1, b2
IDENTITY_PAIRS = (("a1", 0, 2), ("a2", 4, 6), ("b1", 1, 5), ("b2", 3, 7))

COUPLING_TOL = 1e-8
GENUINE_TOL = 1e-9

_OCT = outcome_table(8)


@dataclass(frozen=True)
class OctupleCoupling:
    dist: JointDistribution

    def __post_init__(self):
        if self.dist.arity != 8:
            raise InvalidDistribution("octuple coupling needs arity 8")

    def context_marginal(self, context) -> JointDistribution:
        return marginal(self.dist, CONTEXT_POSITIONS[tuple(context)])

    def check_system(self, system: CyclicSystem, tol: float = COUPLING_TOL) -> None:
        for key in CHSH_CONTEXTS:
            got = self.context_marginal(key).probs
            want = cells_from_stats(system[key]).probs
            err = np.abs(got - want).max()
            if err > tol:
                raise InvalidDistribution(f"context {key} marginal off by {err:.3e}")


@dataclass(frozen=True)
class CbdReport:
    delta_min: float
    delta0: float
    genuine: float
    contextual: bool
    argmin_coupling: OctupleCoupling

    def to_dict(self, include_coupling: bool = False) -> dict:
        out = {
            "delta_min": self.delta_min,
            "delta0": self.delta0,
            "genuine": self.genuine,
            "contextual": self.contextual,
        }
        if include_coupling:
            out["argmin_coupling"] = self.argmin_coupling.dist.to_dict()
        return out


def coupling_constraints(system: CyclicSystem) -> tuple[np.ndarray, np.ndarray]:
    """13 x 256 equality block: normalization plus three moments per context."""
    rows = [np.ones(256)]
    rhs = [1.0]
    for key in CHSH_CONTEXTS:
        pa, pb = CONTEXT_POSITIONS[key]
        st = system[key]
        rows += [_OCT[:, pa], _OCT[:, pb], _OCT[:, pa] * _OCT[:, pb]]
        rhs += [st.mean_a, st.mean_b, st.corr]
    return np.array(rows), np.array(rhs)


def mismatch_vector() -> np.ndarray:
    """Per-atom count of identity pairs whose copies disagree."""
    return sum((_OCT[:, p] != _OCT[:, q]).astype(float) for _, p, q in IDENTITY_PAIRS)


def mismatch_terms(coupling: OctupleCoupling) -> dict:
    p = coupling.dist.probs
    return {name: float(p @ (_OCT[:, i] != _OCT[:, j])) for name, i, j in IDENTITY_PAIRS}


def delta_of_coupling(coupling: OctupleCoupling) -> float:
    return float(coupling.dist.probs @ mismatch_vector())


def delta_min(system: CyclicSystem, verbose: bool = False) -> CbdReport:
    A, b = coupling_constraints(system)
    sol = lp.solve(lp.LinearProgram(mismatch_vector(), A, b), verbose=verbose)
    if not sol.optimal:
        # couplings always exist (the product of the context joints is one)
        raise NumericalBreakdown(f"coupling LP returned {sol.status.value}")
    x = np.clip(sol.x, 0.0, None)
    coupling = OctupleCoupling(JointDistribution(8, x / x.sum()))
    coupling.check_system(system)
    dmin = delta_of_coupling(coupling)
    d0 = signaling_deltas(system).delta0
    genuine = dmin - d0
    return CbdReport(dmin, d0, genuine, genuine > GENUINE_TOL, coupling)


def product_coupling(system: CyclicSystem) -> OctupleCoupling:
    """Couple the four contexts independently; always a valid coupling."""
    probs = np.ones(1)
    for key in CHSH_CONTEXTS:
        probs = np.kron(probs, cells_from_stats(system[key]).probs)
    return OctupleCoupling(JointDistribution(8, probs))
