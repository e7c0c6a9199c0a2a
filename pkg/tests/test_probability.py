import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextuality_kit.errors import EmptyKeepSet, InvalidDistribution, InvalidStats
from contextuality_kit.probability import (
    CyclicSystem,
    JointDistribution,
    PairwiseStats,
    atom_index,
    cells_from_stats,
    marginal,
    moments_from_cells,
    outcome_table,
    system_from_joint,
)

from conftest import random_jpd

# cell order is (-,-), (-,+), (+,-), (+,+)
MM, MP, PM, PP = range(4)


def brute_cells(ma, mb, c):
    """Direct cell formula, one cell at a time."""
    out = {}
    for alpha in (-1, 1):
        for beta in (-1, 1):
            out[(alpha, beta)] = (1 + alpha * ma + beta * mb + alpha * beta * c) / 4
    return out


def test_atom_order_is_lexicographic():
    assert outcome_table(2).tolist() == [[-1, -1], [-1, 1], [1, -1], [1, 1]]
    assert atom_index((1, -1, 1)) == 0b101


def test_uniform_cells():
    assert cells_from_stats(PairwiseStats(0, 0, 0)).probs.tolist() == [0.25] * 4


def test_perfect_correlation_cells():
    p = cells_from_stats(PairwiseStats(0, 0, 1)).probs
    assert p[PP] == p[MM] == 0.5
    assert p[MP] == p[PM] == 0.0


def test_cells_of_skewed_stats():
    p = cells_from_stats(PairwiseStats(0.5, 0.0, 0.5)).probs
    oracle = brute_cells(0.5, 0.0, 0.5)
    assert p[PP] == pytest.approx(0.5) == oracle[(1, 1)]
    assert p[PM] == pytest.approx(0.25) == oracle[(1, -1)]
    assert p[MP] == pytest.approx(0.0) == oracle[(-1, 1)]
    assert p[MM] == pytest.approx(0.25) == oracle[(-1, -1)]
    back = moments_from_cells(cells_from_stats(PairwiseStats(0.5, 0.0, 0.5)))
    assert (back.mean_a, back.mean_b, back.corr) == pytest.approx((0.5, 0.0, 0.5), abs=1e-15)


def test_moments_of_uniform_and_point_mass():
    m = moments_from_cells(JointDistribution.uniform(2))
    assert (m.mean_a, m.mean_b, m.corr) == (0, 0, 0)
    m = moments_from_cells(JointDistribution.point_mass((1, -1)))
    assert (m.mean_a, m.mean_b, m.corr) == (1, -1, -1)


def test_moments_of_eighths():
    probs = np.zeros(4)
    probs[PP], probs[PM], probs[MP], probs[MM] = 0.5, 0.25, 0.125, 0.125
    m = moments_from_cells(JointDistribution(2, probs))
    # mean_a = .5 + .25 - .125 - .125, mean_b = .5 - .25 + .125 - .125, corr = .5 - .25 - .125 + .125
    assert (m.mean_a, m.mean_b, m.corr) == pytest.approx((0.5, 0.25, 0.25), abs=1e-15)


def test_invalid_stats_rejected():
    with pytest.raises(InvalidStats):
        PairwiseStats(1.0, -1.0, 1.0)
    with pytest.raises(InvalidStats):
        PairwiseStats(0.0, 0.0, 1.5)


@st.composite
def valid_stats(draw):
    ma = draw(st.floats(-1, 1))
    mb = draw(st.floats(-1, 1))
    lo, hi = abs(ma + mb) - 1, 1 - abs(ma - mb)
    c = draw(st.floats(lo, hi)) if hi > lo else lo
    return PairwiseStats(ma, mb, c)


@given(valid_stats())
@settings(max_examples=300)
def test_round_trip(s):
    back = moments_from_cells(cells_from_stats(s))
    assert back.mean_a == pytest.approx(s.mean_a, abs=1e-12)
    assert back.mean_b == pytest.approx(s.mean_b, abs=1e-12)
    assert back.corr == pytest.approx(s.corr, abs=1e-12)


def test_marginal_examples():
    assert marginal(JointDistribution.uniform(2), [0]).probs.tolist() == [0.5, 0.5]
    m = marginal(JointDistribution.point_mass((1, -1, 1)), [1])
    assert m.probs.tolist() == [1.0, 0.0]
    table = outcome_table(2)
    pr = (1 + table[:, 0] * table[:, 1]) / 4
    assert marginal(JointDistribution(2, pr), [0]).probs == pytest.approx([0.5, 0.5])


def test_marginal_respects_keep_order():
    d = JointDistribution.point_mass((1, -1, -1))
    assert marginal(d, [0, 1]).prob((1, -1)) == 1.0
    assert marginal(d, [1, 0]).prob((-1, 1)) == 1.0


def test_empty_keep_set():
    with pytest.raises(EmptyKeepSet):
        marginal(JointDistribution.uniform(3), [])


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.data())
@settings(max_examples=100)
def test_marginal_is_linear_and_normalized(seed, arity, data):
    rng = np.random.default_rng(seed)
    keep = data.draw(st.lists(st.integers(0, arity - 1), min_size=1, max_size=arity, unique=True))
    p, q = random_jpd(rng, arity, 1.0), random_jpd(rng, arity, 1.0)
    w = rng.uniform()
    mix = JointDistribution(arity, w * p.probs + (1 - w) * q.probs)
    lhs = marginal(mix, keep).probs
    rhs = w * marginal(p, keep).probs + (1 - w) * marginal(q, keep).probs
    assert lhs == pytest.approx(rhs, abs=1e-14)
    assert marginal(p, keep).probs.sum() == pytest.approx(1.0, abs=1e-14)


def test_pairwise_marginals_of_a_quadruple_are_consistent(rng):
    """Marginals of one JPD over (a1, a2, b1, b2) never signal."""
    for _ in range(50):
        d = random_jpd(rng)
        sys = system_from_joint(d)
        for i in (1, 2):
            assert sys[(i, 1)].mean_a == pytest.approx(sys[(i, 2)].mean_a, abs=1e-14)
        for j in (1, 2):
            assert sys[(1, j)].mean_b == pytest.approx(sys[(2, j)].mean_b, abs=1e-14)


def test_negative_clipping_and_normalization():
    d = JointDistribution(1, [1.0 + 5e-13, -5e-13])
    assert d.probs.tolist() == [1.0, 0.0]
    with pytest.raises(InvalidDistribution):
        JointDistribution(1, [1.1, -0.1])
    with pytest.raises(InvalidDistribution):
        JointDistribution(1, [0.5, 0.49])
    with pytest.raises(InvalidDistribution):
        JointDistribution(2, [0.5, 0.5])


def test_values_are_immutable():
    d = JointDistribution.uniform(2)
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


def test_json_round_trip():
    d = JointDistribution.point_mass((1, -1))
    assert JointDistribution.from_dict(json.loads(json.dumps(d.to_dict()))).probs.tolist() == d.probs.tolist()
    s = PairwiseStats(0.1, -0.2, 0.3, 17)
    assert s.to_dict() == {"mean_a": 0.1, "mean_b": -0.2, "corr": 0.3, "n_trials": 17}
    assert PairwiseStats.from_dict(s.to_dict()) == s
    sys = CyclicSystem.chsh([1, 1, 1, -1])
    assert CyclicSystem.from_dict(json.loads(json.dumps(sys.to_dict()))) == sys


def test_cyclic_system_needs_all_chsh_contexts():
    with pytest.raises(InvalidStats):
        CyclicSystem(4, {(1, 1): PairwiseStats(0, 0, 0)})
    five = CyclicSystem(5, {(k, k % 5 + 1): PairwiseStats(0, 0, math.cos(k)) for k in range(1, 6)})
    assert len(five.correlations()) == 5
