import math

import numpy as np
import pytest

from contextuality_kit import quantum
from contextuality_kit.errors import InsufficientData, MalformedRecord, MissingContext
from contextuality_kit.estimation import (
    ClickRecord,
    ContextCounts,
    count_records,
    format_csv,
    ingest,
    merge_counts,
    parse_csv,
    pooled_system,
    signaling_deltas,
    signaling_significance,
    two_proportion_z,
)
from contextuality_kit.probability import CHSH_CONTEXTS, CyclicSystem, PairwiseStats

from conftest import random_jpd, random_signaling_system


def test_one_record_per_context():
    recs = [ClickRecord(t, i, j, 1, 1) for t, (i, j) in enumerate(CHSH_CONTEXTS)]
    system, counts = ingest(recs)
    for key in CHSH_CONTEXTS:
        s = system[key]
        assert (s.mean_a, s.mean_b, s.corr, s.n_trials) == (1, 1, 1, 1)


def test_law_of_large_numbers():
    rng = np.random.default_rng(3)
    n = 100_000
    ctx = rng.integers(0, 4, size=n)
    same = rng.choice([-1, 1], size=n)
    recs = [ClickRecord(t, *CHSH_CONTEXTS[k], int(o), int(o)) for t, (k, o) in enumerate(zip(ctx, same))]
    system, _ = ingest(recs)
    for key in CHSH_CONTEXTS:
        assert system[key].corr == 1.0
        assert abs(system[key].mean_a) < 0.02
        assert abs(system[key].mean_b) < 0.02


def test_missing_context():
    recs = [ClickRecord(t, i, j, 1, -1) for t, (i, j) in enumerate(CHSH_CONTEXTS[:3])]
    with pytest.raises(MissingContext) as err:
        ingest(recs)
    assert err.value.context == (2, 2)


def test_partitioned_ingestion_matches():
    rng = np.random.default_rng(1)
    recs = [
        ClickRecord(t, int(rng.integers(1, 3)), int(rng.integers(1, 3)), int(rng.choice([-1, 1])), int(rng.choice([-1, 1])))
        for t in range(2000)
    ]
    whole = count_records(recs)
    parts = merge_counts(count_records(recs[:700]), count_records(recs[700:1500]), count_records(recs[1500:]))
    assert whole == parts


def test_no_signaling_deltas_zero():
    rep = signaling_deltas(CyclicSystem.chsh([0.3, -0.2, 0.1, 0.9]))
    assert rep.delta_a == (0, 0) and rep.delta_b == (0, 0) and rep.delta0 == 0


def test_single_shift():
    sys = CyclicSystem.chsh([0, 0, 0, 0], means_a={(1, 1): 0.2})
    rep = signaling_deltas(sys)
    assert rep.delta_a[0] == pytest.approx(0.2)
    assert rep.delta0 == pytest.approx(0.1)


def test_quantum_marginals_do_not_signal():
    rng = np.random.default_rng(11)
    for _ in range(20):
        bundle = quantum.random_local_bundle((2, 2), rng)
        rho = quantum.random_state(4, rng)
        assert signaling_deltas(quantum.quantum_system(rho, bundle)).delta0 <= 1e-9


def test_delta0_zero_iff_marginal_consistency(rng):
    for _ in range(100):
        sys = random_signaling_system(rng)
        rep = signaling_deltas(sys)
        consistent = all(d == 0 for d in rep.delta_a + rep.delta_b)
        assert (rep.delta0 == 0) == consistent


def test_delta0_invariant_under_relabeling(rng):
    for _ in range(100):
        sys = random_signaling_system(rng)
        # flip a1: its means and both of its correlations change sign
        flipped = CyclicSystem(
            4,
            {
                (i, j): PairwiseStats(-s.mean_a if i == 1 else s.mean_a, s.mean_b, -s.corr if i == 1 else s.corr)
                for (i, j), s in sys.contexts.items()
            },
        )
        assert signaling_deltas(flipped).delta0 == pytest.approx(signaling_deltas(sys).delta0, abs=1e-15)


def test_sampled_single_space_has_vanishing_delta0():
    rng = np.random.default_rng(8)
    jpd = random_jpd(rng, 4, 1.0)
    n = 100_000
    atoms = rng.choice(16, size=n, p=jpd.probs)
    ctx = rng.integers(0, 4, size=n)
    bits = (atoms[:, None] >> np.arange(3, -1, -1)) & 1
    vals = 2 * bits - 1  # columns a1, a2, b1, b2
    recs = []
    for t in range(n):
        i, j = CHSH_CONTEXTS[ctx[t]]
        recs.append(ClickRecord(t, i, j, int(vals[t, i - 1]), int(vals[t, 1 + j])))
    system, _ = ingest(recs)
    assert signaling_deltas(system).delta0 < 0.02


def test_z_identical_proportions():
    assert two_proportion_z(30, 60, 30, 60) == (0.0, 1.0)
    z, p = two_proportion_z(5, 10, 5, 10)
    assert z == 0.0 and p == 1.0


def test_z_pooled_formula():
    z, p = two_proportion_z(600, 1000, 500, 1000)
    pooled = 0.55
    expected = 0.1 / math.sqrt(pooled * (1 - pooled) * (2 / 1000))
    assert z == pytest.approx(expected, rel=1e-12)
    assert z == pytest.approx(4.4947, abs=1e-4)
    assert p < 1e-4


def test_z_needs_two_trials():
    with pytest.raises(InsufficientData):
        two_proportion_z(1, 1, 3, 5)


def test_significance_order_and_sign():
    counts = {key: ContextCounts((25, 25, 25, 25)) for key in CHSH_CONTEXTS}
    counts[(1, 1)] = ContextCounts((10, 10, 40, 40))  # a1 = +1 in 80% of C11
    zs, ps = signaling_significance(counts)
    # pooled 0.65 over n = 100 + 100
    assert zs[0] == pytest.approx(0.3 / math.sqrt(0.65 * 0.35 * 0.02), rel=1e-12)
    assert ps[0] < 1e-4
    assert zs[1] == 0 and ps[1] == 1
    assert ps[2] == 1 and ps[3] == 1


def test_pooled_system_is_signaling_free():
    counts = {key: ContextCounts(tuple(int(v) for v in np.random.default_rng(k).integers(10, 50, 4))) for k, key in enumerate(CHSH_CONTEXTS)}
    assert signaling_deltas(pooled_system(counts)).delta0 == 0


def test_csv_round_trip():
    recs = [ClickRecord(0, 1, 2, -1, 1), ClickRecord(1, 2, 2, 1, 1)]
    text = format_csv(recs)
    assert text.splitlines()[0] == "trial,setting_a,setting_b,outcome_a,outcome_b"
    assert text.splitlines()[1] == "0,1,2,-1,1"
    assert parse_csv(text) == recs


@pytest.mark.parametrize(
    "text, line",
    [
        ("trial,setting_a,setting_b,outcome_a,outcome_b\n0,1,1,1\n", 2),
        ("trial,setting_a,setting_b,outcome_a,outcome_b\n0,1,1,1,1\n1,3,1,1,1\n", 3),
        ("trial,setting_a,setting_b,outcome_a,outcome_b\n0,1,1,0,1\n", 2),
        ("trial,setting_a,setting_b,outcome_a,outcome_b\n0,1,1,x,1\n", 2),
        ("trial,a,b,outcome_a,outcome_b\n", 1),
        ("", 1),
    ],
)
def test_malformed_csv_reports_line(text, line):
    with pytest.raises(MalformedRecord) as err:
        parse_csv(text)
    assert err.value.line == line
