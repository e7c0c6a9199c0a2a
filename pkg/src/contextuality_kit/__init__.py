"""Contextuality and signaling analysis for two-party, two-setting measurement systems."""

from .errors import ContextualityError
from .probability import CyclicSystem, JointDistribution, PairwiseStats

__version__ = "0.1.0"

__all__ = [
    "ContextualityError",
    "CyclicSystem",
    "JointDistribution",
    "PairwiseStats",
    "__version__",
]
