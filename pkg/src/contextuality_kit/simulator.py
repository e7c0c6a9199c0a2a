"""Seeded Monte Carlo generator of Bohm-Bell click data.

Randomness comes from numpy's PCG64 with two independent streams spawned from
one ``SeedSequence(seed)``: stream 0 chooses settings, stream 1 draws one
uniform per trial for the outcome. Each trial consumes exactly one draw from
each stream, so extending ``n_trials`` leaves earlier records untouched.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import ConfigError
from .estimation import ClickRecord, format_csv
from .probability import CHSH_CONTEXTS, CyclicSystem
from .quantum import CANONICAL_ANGLES_A, CANONICAL_ANGLES_B, Mode, Scenario, scenario

SETTINGS_STREAM = 0
OUTCOMES_STREAM = 1

# outcome pairs in atom order
_CELL_OUTCOMES = np.array([(-1, -1), (-1, 1), (1, -1), (1, 1)])


class Schedule(str, enum.Enum):
    UNIFORM_RANDOM = "uniform"
    ROUND_ROBIN = "round-robin"


@dataclass(frozen=True)
class SimulationConfig:
    mode: Mode = Mode.CLEAN
    angles_a: tuple = CANONICAL_ANGLES_A
    angles_b: tuple = CANONICAL_ANGLES_B
    n_trials: int = 100_000
    seed: int = 0
    setting_schedule: Schedule = Schedule.UNIFORM_RANDOM
    drift_epsilon: float = 0.0
    crosstalk_strength: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
            object.__setattr__(self, "setting_schedule", Schedule(self.setting_schedule))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("angles_a", "angles_b"):
            angles = tuple(float(a) for a in getattr(self, name))
            if len(angles) != 2 or not all(math.isfinite(a) for a in angles):
                raise ConfigError(f"{name} needs two finite angles")
            object.__setattr__(self, name, angles)
        if int(self.n_trials) < 1:
            raise ConfigError("n_trials must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for name in ("drift_epsilon", "crosstalk_strength"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)

    def scenario(self) -> Scenario:
        return scenario(self.mode, self.drift_epsilon, self.crosstalk_strength)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["setting_schedule"] = self.setting_schedule.value
        d["angles_a"] = list(self.angles_a)
        d["angles_b"] = list(self.angles_b)
        return d

    @classmethod
    def from_dict(cls, data) -> "SimulationConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def streams(seed: int, n: int = 2) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def context_cdfs(config: SimulationConfig) -> np.ndarray:
    """Row k is the cumulative cell distribution of context CHSH_CONTEXTS[k]."""
    sc = config.scenario()
    rows = []
    for i, j in CHSH_CONTEXTS:
        p = sc.context_distribution(config.angles_a[i - 1], config.angles_b[j - 1]).probs
        rows.append(np.cumsum(p))
    cdf = np.array(rows)
    cdf[:, -1] = 1.0
    return cdf


def _sample_cells(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    # inverse CDF: first cell whose cumulative mass exceeds u
    return (u[:, None] >= cdf_rows).sum(axis=1)


def simulate_arrays(config: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Context index (0..3) and cell index (0..3) per trial."""
    settings_rng, outcome_rng = streams(config.seed)
    n = config.n_trials
    if config.setting_schedule is Schedule.ROUND_ROBIN:
        ctx = np.arange(n) % 4
    else:
        ctx = settings_rng.integers(0, 4, size=n)
    u = outcome_rng.random(size=n)
    cells = _sample_cells(context_cdfs(config)[ctx], u)
    return ctx, cells


def simulate(config: SimulationConfig) -> list[ClickRecord]:
    ctx, cells = simulate_arrays(config)
    records = []
    for t, (k, c) in enumerate(zip(ctx.tolist(), cells.tolist())):
        sa, sb = CHSH_CONTEXTS[k]
        oa, ob = _CELL_OUTCOMES[c]
        records.append(ClickRecord(t, sa, sb, int(oa), int(ob)))
    return records


def metadata(config: SimulationConfig) -> dict:
    return {
        "tool": "contextuality-kit",
        "version": __version__,
        "generator": "PCG64/SeedSequence.spawn(2): stream 0 settings, stream 1 outcomes",
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
    }


def metadata_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_run(config: SimulationConfig, csv_path) -> tuple[Path, Path]:
    csv_path = Path(csv_path)
    csv_path.write_text(format_csv(simulate(config)))
    meta = metadata_path(csv_path)
    meta.write_text(json.dumps(metadata(config), indent=2, sort_keys=True) + "\n")
    return csv_path, meta


def pr_box_system() -> CyclicSystem:
    """No-signaling correlations (1, 1, 1, -1) with uniform marginals."""
    return CyclicSystem.chsh([1.0, 1.0, 1.0, -1.0])


def correlation_at(theta: float, phi: float, n_trials: int, seed: int, mode: Mode | str = Mode.CLEAN) -> float:
    """Empirical correlation from ``n_trials`` samples at one fixed setting pair."""
    sc = scenario(mode)
    cdf = np.cumsum(sc.context_distribution(theta, phi).probs)
    cdf[-1] = 1.0
    _, outcome_rng = streams(seed)
    cells = _sample_cells(np.broadcast_to(cdf, (n_trials, 4)), outcome_rng.random(size=n_trials))
    products = _CELL_OUTCOMES[cells].prod(axis=1)
    return float(products.mean())


def correlation_curve(angle_pairs: Sequence[tuple], n_per_point: int, seed: int) -> list[dict]:
    """Empirical vs theoretical -cos 2(theta - phi) for a list of setting pairs."""
    rows = []
    for k, (theta, phi) in enumerate(angle_pairs):
        emp = correlation_at(theta, phi, n_per_point, seed + k)
        rows.append(
            {
                "theta": theta,
                "phi": phi,
                "empirical": emp,
                "theory": -math.cos(2 * (theta - phi)),
            }
        )
    return rows
