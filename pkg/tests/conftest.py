import numpy as np
import pytest

from contextuality_kit.probability import CHSH_CONTEXTS, CyclicSystem, JointDistribution, PairwiseStats


def random_stats(rng, mean_a=None, mean_b=None):
    """Valid PairwiseStats: correlation uniform over the range the means allow."""
    ma = rng.uniform(-1, 1) if mean_a is None else mean_a
    mb = rng.uniform(-1, 1) if mean_b is None else mean_b
    lo, hi = abs(ma + mb) - 1, 1 - abs(ma - mb)
    return PairwiseStats(ma, mb, rng.uniform(lo, hi))


def random_nosignaling_system(rng, zero_means_prob=0.3):
    """One mean per observable shared by both contexts it appears in."""
    if rng.random() < zero_means_prob:
        means = np.zeros(4)
    else:
        means = rng.uniform(-1, 1, size=4) * rng.uniform(0, 1)
    ma = {1: means[0], 2: means[1]}
    mb = {1: means[2], 2: means[3]}
    return CyclicSystem(4, {(i, j): random_stats(rng, ma[i], mb[j]) for i, j in CHSH_CONTEXTS})


def random_signaling_system(rng):
    return CyclicSystem(4, {key: random_stats(rng) for key in CHSH_CONTEXTS})


def random_jpd(rng, arity=4, concentration=None):
    alpha = concentration if concentration is not None else rng.choice([0.1, 0.5, 1.0])
    return JointDistribution(arity, rng.dirichlet(np.full(2**arity, alpha)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
