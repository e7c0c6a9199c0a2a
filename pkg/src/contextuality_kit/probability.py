"""Finite Kolmogorov spaces over ±1 variables and per-context statistics.

Outcome tuples index probability vectors lexicographically with -1 before +1,
variable 0 being the most significant. For two variables the cell order is
(-1,-1), (-1,+1), (+1,-1), (+1,+1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyKeepSet, InvalidDistribution, InvalidStats

NEGATIVE_CLIP_TOL = 1e-12
NORMALIZATION_TOL = 1e-9
CELL_TOL = 1e-9

OUTCOMES = (-1, 1)

CHSH_CONTEXTS = ((1, 1), (1, 2), (2, 1), (2, 2))


def check_outcome(value) -> int:
    if value not in OUTCOMES:
        raise ValueError(f"outcome must be -1 or +1, got {value!r}")
    return int(value)


def outcome_table(arity: int) -> np.ndarray:
    """Matrix of shape (2**arity, arity) listing every outcome tuple in atom order."""
    return np.array(list(itertools.product(OUTCOMES, repeat=arity)), dtype=float).reshape(
        2**arity, arity
    )


@dataclass(frozen=True)
class JointDistribution:
    arity: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.arity < 1:
            raise InvalidDistribution("arity must be at least 1")
        p = np.array(self.probs, dtype=float).ravel()
        if p.shape != (2**self.arity,):
            raise InvalidDistribution(
                f"expected {2**self.arity} probabilities for arity {self.arity}, got {p.size}"
            )
        if not np.all(np.isfinite(p)):
            raise InvalidDistribution("probabilities must be finite")
        if p.min() < -NEGATIVE_CLIP_TOL:
            raise InvalidDistribution(f"negative probability {p.min():.3e}")
        total = p.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidDistribution(f"probabilities sum to {total!r}")
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def point_mass(cls, outcome: Sequence[int]) -> "JointDistribution":
        outcome = [check_outcome(v) for v in outcome]
        probs = np.zeros(2 ** len(outcome))
        probs[atom_index(outcome)] = 1.0
        return cls(len(outcome), probs)

    @classmethod
    def uniform(cls, arity: int) -> "JointDistribution":
        return cls(arity, np.full(2**arity, 0.5**arity))

    def prob(self, outcome: Sequence[int]) -> float:
        return float(self.probs[atom_index(outcome)])

    def expectation(self, func) -> float:
        """E[func(outcome_row)] where func maps an (atoms, arity) table to per-atom values."""
        return float(self.probs @ np.asarray(func(outcome_table(self.arity)), dtype=float))

    def to_dict(self) -> dict:
        return {"arity": self.arity, "probs": [float(v) for v in self.probs]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "JointDistribution":
        return cls(int(data["arity"]), np.asarray(data["probs"], dtype=float))


def atom_index(outcome: Sequence[int]) -> int:
    idx = 0
    for v in outcome:
        idx = 2 * idx + (1 if check_outcome(v) == 1 else 0)
    return idx


def marginal(dist: JointDistribution, keep: Iterable[int]) -> JointDistribution:
    """Sum out every variable not in ``keep``; kept variables appear in the order given."""
    keep = list(keep)
    if not keep:
        raise EmptyKeepSet("keep set must be nonempty")
    if len(set(keep)) != len(keep) or any(k < 0 or k >= dist.arity for k in keep):
        raise ValueError(f"invalid keep set {keep} for arity {dist.arity}")
    tensor = dist.probs.reshape((2,) * dist.arity)
    dropped = tuple(ax for ax in range(dist.arity) if ax not in keep)
    reduced = tensor.sum(axis=dropped) if dropped else tensor
    remaining = sorted(keep)
    reduced = np.transpose(reduced, [remaining.index(k) for k in keep])
    return JointDistribution(len(keep), reduced.ravel())


@dataclass(frozen=True)
class PairwiseStats:
    """Means of two ±1 observables and their product moment in one context."""

    mean_a: float
    mean_b: float
    corr: float
    n_trials: int = 0

    def __post_init__(self):
        for name in ("mean_a", "mean_b", "corr"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise InvalidStats(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.n_trials < 0:
            raise InvalidStats("n_trials must be nonnegative")
        cells = _cells(self.mean_a, self.mean_b, self.corr)
        if cells.min() < -CELL_TOL:
            raise InvalidStats(
                f"no joint distribution has moments ({self.mean_a}, {self.mean_b}, {self.corr})"
            )

    def cells(self) -> np.ndarray:
        return _cells(self.mean_a, self.mean_b, self.corr)

    def to_dict(self) -> dict:
        return {
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "corr": self.corr,
            "n_trials": self.n_trials,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PairwiseStats":
        return cls(
            float(data["mean_a"]),
            float(data["mean_b"]),
            float(data["corr"]),
            int(data.get("n_trials", 0)),
        )


def _cells(mean_a, mean_b, corr) -> np.ndarray:
    table = outcome_table(2)
    alpha, beta = table[:, 0], table[:, 1]
    return (1 + alpha * mean_a + beta * mean_b + alpha * beta * corr) / 4


def cells_from_stats(stats: PairwiseStats) -> JointDistribution:
    cells = stats.cells()
    if cells.min() < -CELL_TOL:
        raise InvalidStats(f"cell probability {cells.min():.3e} < 0")
    # cells sum to exactly 1 by construction; clip the sub-tolerance negatives
    return JointDistribution(2, np.clip(cells, 0.0, None) / np.clip(cells, 0.0, None).sum())


def moments_from_cells(dist: JointDistribution, n_trials: int = 0) -> PairwiseStats:
    if dist.arity != 2:
        raise InvalidDistribution("moments_from_cells needs an arity-2 distribution")
    table = outcome_table(2)
    p = dist.probs
    return PairwiseStats(
        float(p @ table[:, 0]),
        float(p @ table[:, 1]),
        float(p @ (table[:, 0] * table[:, 1])),
        n_trials,
    )


@dataclass(frozen=True)
class CyclicSystem:
    """Contexts of a cyclic measurement system keyed by (i, j).

    For ``n == 4`` the keys are the CHSH contexts (1,1), (1,2), (2,1), (2,2):
    context (i, j) holds observable a_i jointly with b_j. For other ``n`` the
    keys are (k, k % n + 1), k = 1..n.
    """

    n: int
    contexts: Mapping[tuple, PairwiseStats]

    def __post_init__(self):
        expected = set(self.expected_keys(self.n))
        got = {tuple(k) for k in self.contexts}
        if got != expected:
            raise InvalidStats(f"contexts {sorted(got)} do not match {sorted(expected)}")
        object.__setattr__(
            self, "contexts", {tuple(k): self.contexts[k] for k in self.contexts}
        )

    @staticmethod
    def expected_keys(n: int) -> tuple:
        if n == 4:
            return CHSH_CONTEXTS
        if n < 3:
            raise InvalidStats("a cyclic system needs n >= 3")
        return tuple((k, k % n + 1) for k in range(1, n + 1))

    def __getitem__(self, key) -> PairwiseStats:
        return self.contexts[tuple(key)]

    def keys(self) -> tuple:
        return self.expected_keys(self.n)

    def correlations(self) -> np.ndarray:
        return np.array([self[k].corr for k in self.keys()])

    @classmethod
    def chsh(
        cls,
        correlations: Sequence[float],
        means_a: Mapping | None = None,
        means_b: Mapping | None = None,
        n_trials: int = 0,
    ) -> "CyclicSystem":
        """Build an n=4 system from correlations in (11, 12, 21, 22) order.

        ``means_a`` / ``means_b`` map context keys to the marginal means; absent
        entries default to 0.
        """
        means_a = means_a or {}
        means_b = means_b or {}
        contexts = {
            key: PairwiseStats(means_a.get(key, 0.0), means_b.get(key, 0.0), c, n_trials)
            for key, c in zip(CHSH_CONTEXTS, correlations)
        }
        return cls(4, contexts)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "contexts": [
                {"context": list(k), **self[k].to_dict()} for k in self.keys()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CyclicSystem":
        contexts = {
            tuple(entry["context"]): PairwiseStats.from_dict(entry)
            for entry in data["contexts"]
        }
        return cls(int(data["n"]), contexts)


def system_from_joint(dist: JointDistribution) -> CyclicSystem:
    """CHSH system whose contexts are the (a_i, b_j) marginals of a JPD over (a1, a2, b1, b2)."""
    if dist.arity != 4:
        raise InvalidDistribution("expected a distribution over (a1, a2, b1, b2)")
    contexts = {
        (i, j): moments_from_cells(marginal(dist, [i - 1, 1 + j]))
        for i, j in CHSH_CONTEXTS
    }
    return CyclicSystem(4, contexts)
