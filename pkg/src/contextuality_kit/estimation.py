"""Click-record ingestion, per-context estimates and signaling measures."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InsufficientData, MalformedRecord, MissingContext
from .probability import CHSH_CONTEXTS, CyclicSystem, PairwiseStats, atom_index

CSV_HEADER = ("trial", "setting_a", "setting_b", "outcome_a", "outcome_b")

# (observable, context where it is minuend, context where it is subtrahend, side)
OBSERVABLE_PAIRS = (
    ("a1", (1, 1), (1, 2), 0),
    ("a2", (2, 1), (2, 2), 0),
    ("b1", (1, 1), (2, 1), 1),
    ("b2", (1, 2), (2, 2), 1),
)


@dataclass(frozen=True)
class ClickRecord:
    trial: int
    setting_a: int
    setting_b: int
    outcome_a: int
    outcome_b: int

    def __post_init__(self):
        if self.trial < 0:
            raise ValueError("trial index must be nonnegative")
        if self.setting_a not in (1, 2) or self.setting_b not in (1, 2):
            raise ValueError(f"settings must be 1 or 2, got ({self.setting_a}, {self.setting_b})")
        if self.outcome_a not in (-1, 1) or self.outcome_b not in (-1, 1):
            raise ValueError(f"outcomes must be -1 or 1, got ({self.outcome_a}, {self.outcome_b})")

    @property
    def context(self) -> tuple:
        return (self.setting_a, self.setting_b)


@dataclass(frozen=True)
class ContextCounts:
    """Cell counts in atom order (-1,-1), (-1,+1), (+1,-1), (+1,+1)."""

    cells: tuple

    @property
    def n(self) -> int:
        return int(sum(self.cells))

    @property
    def n_a_plus(self) -> int:
        return int(self.cells[2] + self.cells[3])

    @property
    def n_b_plus(self) -> int:
        return int(self.cells[1] + self.cells[3])

    def stats(self) -> PairwiseStats:
        n = self.n
        mm, mp, pm, pp = self.cells
        # integer numerators keep the plug-in estimates exact up to one division
        return PairwiseStats(
            (pm + pp - mm - mp) / n,
            (mp + pp - mm - pm) / n,
            (mm + pp - mp - pm) / n,
            n,
        )


@dataclass(frozen=True)
class SignalingReport:
    delta_a: tuple
    delta_b: tuple
    delta0: float
    z_scores: tuple | None = None
    p_values: tuple | None = None

    def min_p_value(self) -> float:
        return min(self.p_values) if self.p_values else 1.0

    def to_dict(self) -> dict:
        return {
            "delta_a": list(self.delta_a),
            "delta_b": list(self.delta_b),
            "delta0": self.delta0,
            "z_scores": None if self.z_scores is None else list(self.z_scores),
            "p_values": None if self.p_values is None else list(self.p_values),
        }


def count_records(records: Iterable[ClickRecord]) -> dict:
    tallies = {key: [0, 0, 0, 0] for key in CHSH_CONTEXTS}
    for rec in records:
        tallies[rec.context][atom_index((rec.outcome_a, rec.outcome_b))] += 1
    return {key: ContextCounts(tuple(v)) for key, v in tallies.items()}


def merge_counts(*parts: Mapping) -> dict:
    """Combine counts from partitions of one record stream."""
    merged = {}
    for key in CHSH_CONTEXTS:
        cells = np.zeros(4, dtype=np.int64)
        for part in parts:
            if key in part:
                cells += np.asarray(part[key].cells)
        merged[key] = ContextCounts(tuple(int(v) for v in cells))
    return merged


def system_from_counts(counts: Mapping) -> CyclicSystem:
    for key in CHSH_CONTEXTS:
        if key not in counts or counts[key].n == 0:
            raise MissingContext(key)
    return CyclicSystem(4, {key: counts[key].stats() for key in CHSH_CONTEXTS})


def ingest(records: Iterable[ClickRecord]) -> tuple[CyclicSystem, dict]:
    counts = count_records(records)
    return system_from_counts(counts), counts


def signaling_deltas(system: CyclicSystem) -> SignalingReport:
    deltas = []
    for _, first, second, side in OBSERVABLE_PAIRS:
        attr = "mean_a" if side == 0 else "mean_b"
        deltas.append(getattr(system[first], attr) - getattr(system[second], attr))
    delta0 = 0.5 * sum(abs(d) for d in deltas)
    return SignalingReport(tuple(deltas[:2]), tuple(deltas[2:]), delta0)


def two_proportion_z(k1: int, n1: int, k2: int, n2: int) -> tuple[float, float]:
    """Pooled two-proportion z statistic and its two-sided normal p-value."""
    if n1 < 2 or n2 < 2:
        raise InsufficientData(f"need at least 2 trials per context, got {n1} and {n2}")
    p1, p2 = k1 / n1, k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    var = pooled * (1 - pooled) * (1 / n1 + 1 / n2)
    if var == 0.0:
        # both samples are constant and therefore identical
        return 0.0, 1.0
    z = (p1 - p2) / math.sqrt(var)
    return z, math.erfc(abs(z) / math.sqrt(2))


def signaling_significance(counts: Mapping) -> tuple[tuple, tuple]:
    """z-scores and p-values for a1, a2, b1, b2 comparing P(outcome=+1) across contexts."""
    zs, ps = [], []
    for _, first, second, side in OBSERVABLE_PAIRS:
        c1, c2 = counts[first], counts[second]
        k1 = c1.n_a_plus if side == 0 else c1.n_b_plus
        k2 = c2.n_a_plus if side == 0 else c2.n_b_plus
        z, p = two_proportion_z(k1, c1.n, k2, c2.n)
        zs.append(z)
        ps.append(p)
    return tuple(zs), tuple(ps)


def signaling_report(system: CyclicSystem, counts: Mapping | None = None) -> SignalingReport:
    report = signaling_deltas(system)
    if counts is None:
        return report
    zs, ps = signaling_significance(counts)
    return SignalingReport(report.delta_a, report.delta_b, report.delta0, zs, ps)


def pooled_system(counts: Mapping) -> CyclicSystem:
    """No-signaling projection: each observable's mean is pooled over its two contexts.

    Correlations are kept, clipped into the range the pooled means allow. Used
    to put the joint-distribution oracle to empirical data whose marginal
    differences are not statistically significant.
    """
    pooled = {}
    for name, first, second, side in OBSERVABLE_PAIRS:
        c1, c2 = counts[first], counts[second]
        k = (c1.n_a_plus + c2.n_a_plus) if side == 0 else (c1.n_b_plus + c2.n_b_plus)
        pooled[name] = 2 * k / (c1.n + c2.n) - 1
    contexts = {}
    for i, j in CHSH_CONTEXTS:
        st = counts[(i, j)].stats()
        ma, mb = pooled[f"a{i}"], pooled[f"b{j}"]
        corr = min(max(st.corr, abs(ma + mb) - 1), 1 - abs(ma - mb))
        contexts[(i, j)] = PairwiseStats(ma, mb, corr, st.n_trials)
    return CyclicSystem(4, contexts)


def _parse_int(text, line, field, allowed=None):
    try:
        value = int(text)
    except (TypeError, ValueError):
        raise MalformedRecord(line, f"{field} is not an integer: {text!r}") from None
    if allowed is not None and value not in allowed:
        raise MalformedRecord(line, f"{field} must be one of {allowed}, got {value}")
    return value


def parse_csv(text: str) -> list[ClickRecord]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRecord(1, "empty file") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise MalformedRecord(1, f"header must be {','.join(CSV_HEADER)}")
    records = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise MalformedRecord(line, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
        trial = _parse_int(row[0], line, "trial")
        if trial < 0:
            raise MalformedRecord(line, "trial must be nonnegative")
        records.append(
            ClickRecord(
                trial,
                _parse_int(row[1], line, "setting_a", (1, 2)),
                _parse_int(row[2], line, "setting_b", (1, 2)),
                _parse_int(row[3], line, "outcome_a", (-1, 1)),
                _parse_int(row[4], line, "outcome_b", (-1, 1)),
            )
        )
    return records


def read_csv(path) -> list[ClickRecord]:
    return parse_csv(Path(path).read_text())


def format_csv(records: Sequence[ClickRecord]) -> str:
    lines = [",".join(CSV_HEADER)]
    lines.extend(
        f"{r.trial},{r.setting_a},{r.setting_b},{r.outcome_a},{r.outcome_b}" for r in records
    )
    return "\n".join(lines) + "\n"


def write_csv(records: Sequence[ClickRecord], path) -> None:
    Path(path).write_text(format_csv(records))
