import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssbm.masks import MaskConfig, lerf_mask_bubble, morf_mask_bubble
from ssbm.metrics import (
    EvalRecord,
    PhonemeStat,
    accuracy_by_energy_bin,
    delta_lerf,
    delta_morf,
    energy_drop_fraction,
    phoneme_stats,
    phoneme_trend,
    ranking_auc,
    sweep_thresholds,
    transition_threshold,
)


def rec(method="bubble", threshold=0.1, a_w=1.0, a_o=0.0, e_l=0.5, e_m=0.5, word=0, utt="u", a_w_m=None, a_o_m=None,
        phonemes=None):
    return EvalRecord(utt, word, "w", method, threshold, a_w, a_o, e_l,
                      a_w if a_w_m is None else a_w_m, a_o if a_o_m is None else a_o_m, e_m, phonemes)


def test_energy_drop_two_bin():
    power = np.array([[3.0, 1.0]])
    assert energy_drop_fraction(power, np.array([[1.0, 1e-4]])) == 0.75
    assert energy_drop_fraction(power, np.ones((1, 2))) == 1.0
    assert energy_drop_fraction(power, np.full((1, 2), 1e-4)) == 0.0
    assert energy_drop_fraction(power, np.array([[0.5, 0.5]]), continuous=True) == pytest.approx(0.5)


def test_energy_drop_errors():
    with pytest.raises(ValueError):
        energy_drop_fraction(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        energy_drop_fraction(np.ones((2, 2)), np.ones((2, 3)))


@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3), st.booleans())
def test_energy_drop_scale_invariance_and_monotonicity(seed, scale, continuous):
    rng = np.random.default_rng(seed)
    power = rng.random((8, 9))
    mask = 10 ** (0.05 * rng.uniform(-80, 0, (8, 9)))
    e = energy_drop_fraction(power, mask, continuous=continuous)
    assert energy_drop_fraction(power * scale, mask, continuous=continuous) == pytest.approx(e, abs=1e-12)
    bigger = np.minimum(mask * rng.uniform(1, 10, mask.shape), 1.0)
    assert energy_drop_fraction(power, bigger, continuous=continuous) >= e - 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 0.5), st.floats(0.1, 0.9))
def test_near_complementarity(seed, t, alpha):
    """With no energy in either transition band the two obscured fractions sum to one."""
    rng = np.random.default_rng(seed)
    cfg = MaskConfig(t, alpha=alpha)
    p = rng.random((20, 30))
    lo, hi = alpha * t * 0.999, (2 - alpha) * t * 1.001
    power = rng.random((20, 30))
    power[(p > lo) & (p < hi)] = 0.0
    # plant a few strongly important points so both masks have something to act on
    p[:3, :3] = alpha * t * 0.5
    power[:3, :3] = 1.0
    e_l = energy_drop_fraction(power, lerf_mask_bubble(p, cfg).values)
    e_m = energy_drop_fraction(power, morf_mask_bubble(p, cfg).values)
    assert abs(e_l + e_m - 1.0) <= 0.02


def test_delta_examples():
    assert delta_lerf(0.8, 0.2, 0.7) == pytest.approx(2.0)
    assert delta_morf(0.1, 0.9, 0.2) == pytest.approx(-4.0)
    assert delta_lerf(0.4, 0.4, 0.3) == 0.0 and delta_morf(0.4, 0.4, 0.3) == 0.0
    assert math.isnan(delta_lerf(1.0, 0.0, 1.0))
    assert math.isnan(delta_morf(0.0, 1.0, 0.0))


def test_sweep_single_record_and_additivity():
    recs = [rec(threshold=t, a_w=0.9, a_o=0.3, e_l=0.6, e_m=0.2, a_w_m=0.1, a_o_m=0.5) for t in (0.01, 0.1)]
    report = sweep_thresholds(recs)
    for row, r in zip(report.rows, recs):
        assert row.mean_delta_lerf == pytest.approx(r.delta_lerf)
        assert row.mean_delta_morf == pytest.approx(r.delta_morf)
        assert row.ssbm == row.mean_delta_lerf + row.mean_delta_morf


def test_sweep_excludes_undefined_and_counts_them():
    recs = [rec(e_l=1.0, e_m=0.0), rec(word=1, a_w=1.0, a_o=0.5, e_l=0.5)]
    row = sweep_thresholds(recs).rows[0]
    assert (row.n_lerf, row.excluded_lerf, row.n_morf, row.excluded_morf) == (1, 1, 1, 1)
    assert row.mean_delta_lerf == pytest.approx(1.0)


def test_best_finds_planted_peak_and_breaks_ties_low():
    grid = np.logspace(-8, 0, 25)
    heights = np.exp(-0.5 * ((np.arange(25) - 9) / 3.0) ** 2)
    recs = [rec(threshold=float(t), a_w=h, a_o=0.0, e_l=0.0, e_m=1.0, a_w_m=0.0, a_o_m=h)
            for t, h in zip(grid, heights)]
    t_best, s_best = sweep_thresholds(recs).best("bubble")
    assert t_best == grid[9]
    assert s_best == pytest.approx(2.0)
    tied = [rec(threshold=0.5), rec(threshold=0.1), rec(threshold=0.3)]
    assert sweep_thresholds(tied).best("bubble")[0] == 0.1
    assert sweep_thresholds(tied).best("energy") == (None, pytest.approx(math.nan, nan_ok=True))


def test_accuracy_bins():
    curve = accuracy_by_energy_bin([0.886, 0.894, 0.5, 0.005], [1.0, 0.0, 0.5, 1.0])
    assert curve.bins[89] == (0.5, 2)
    assert curve.percents() == [1, 50, 89]
    assert accuracy_by_energy_bin([0.3], [0.25]).bins == {30: (0.25, 1)}
    with pytest.raises(ValueError):
        accuracy_by_energy_bin([1.2], [1])


def test_transition_examples():
    g = [1, 2, 3, 4, 5]
    assert transition_threshold(g, [0, 0, 1, 1, 1], "lerf") == 3
    assert transition_threshold([1, 2, 3], [1, 1, 1], "lerf") == 1
    assert transition_threshold(g, [0, 1, 0, 1, 1], "lerf") == 4
    assert transition_threshold(g, [0, 0, 0, 0, 0], "lerf") is None
    assert transition_threshold(g, [1, 1, 0, 1, 0], "morf") == 2
    assert transition_threshold(g, [0, 1, 1, 1, 1], "morf") is None
    with pytest.raises(ValueError):
        transition_threshold([2, 1], [1, 1], "lerf")
    with pytest.raises(ValueError):
        transition_threshold([1, 2], [1, 1], "sideways")


@given(st.lists(st.booleans(), min_size=1, max_size=12))
def test_lerf_transition_is_start_of_final_run(correct):
    grid = list(range(len(correct)))
    got = transition_threshold(grid, correct, "lerf")
    if not correct[-1]:
        assert got is None
    else:
        assert all(correct[got:])
        assert got == 0 or not correct[got - 1]


def test_phoneme_pipeline():
    grid = [1e-3, 1e-2, 1e-1]
    recs = []
    for word, (pc, pattern) in enumerate([(2, [1, 1, 1]), (2, [0, 1, 1]), (8, [0, 0, 1]), (5, [0, 0, 0])]):
        for t, ok in zip(grid, pattern):
            recs.append(rec(threshold=t, a_w=float(ok), word=word, a_w_m=1.0, phonemes=pc))
    recs.append(rec(threshold=1e-3, word=9, phonemes=None))
    stats = phoneme_stats(recs)
    assert [s.phoneme_count for s in stats] == [2, 2, 8, 5]
    trend = phoneme_trend(stats)
    assert trend.mean(2) == pytest.approx((1e-3 + 1e-2) / 2)
    assert trend.mean(8) == pytest.approx(1e-1)
    assert trend.excluded["lerf"] == 1
    assert math.isnan(trend.mean(3))


def test_phoneme_trend_single_and_empty():
    t = phoneme_trend([PhonemeStat("a", 3, 0.1, None), PhonemeStat("b", 3, 0.3, None)])
    assert [(r.phoneme_count, r.variant, r.count) for r in t.rows] == [(3, "lerf", 2)]
    assert t.mean(3) == pytest.approx(0.2)
    empty = phoneme_trend([PhonemeStat("a", 3, None, None)])
    assert empty.empty and empty.excluded == {"lerf": 1, "morf": 1}


def auc_pairs(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    wins = sum((p > n) + 0.5 * (p == n) for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


@given(st.integers(0, 2**32 - 1), st.integers(4, 60))
def test_ranking_auc_matches_pair_count(seed, n):
    rng = np.random.default_rng(seed)
    scores = rng.integers(0, 5, n).astype(float)
    labels = rng.random(n) < 0.4
    if labels.all() or not labels.any():
        labels[0] = not labels[0]
    auc, se = ranking_auc(scores, labels)
    assert auc == pytest.approx(auc_pairs(scores, labels), abs=1e-12)
    assert se >= 0


def test_ranking_auc_errors():
    with pytest.raises(ValueError):
        ranking_auc([1, 2], [True, True])
