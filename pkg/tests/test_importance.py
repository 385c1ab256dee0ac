import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssbm.bubble_noise import BubbleFieldConfig, generate_bubble_field
from ssbm.dsp import Waveform, stft
from ssbm.importance import (
    ImportanceMap,
    IntelligibilityTable,
    WordSpan,
    compute_bubble_importance,
    compute_energy_importance,
    importance_from_accumulator,
    smoothed_energy,
    threshold_bubble_map,
)
from ssbm.metrics import ranking_auc
from ssbm.stats import CorrelationAccumulator


def planted_experiment(n_mix=300, seed=0):
    """Fields over a small grid and a word that is correct iff a planted block is mostly audible."""
    shape = (513, 40)
    cfg = BubbleFieldConfig(bubbles_per_second=60, sigma_time_ms=40, sigma_mel=64)
    region = np.zeros(shape, dtype=bool)
    region[100:160, 15:25] = True
    stack, ys = [], []
    for j in range(n_mix):
        f = generate_bubble_field(seed * 100000 + j, cfg, shape, 0.65)
        stack.append(f.values)
        ys.append(int((f.values[region] > 0.5).mean() >= 0.3))
    return np.array(stack), np.array(ys), region


def test_planted_region_is_recovered():
    stack, y, region = planted_experiment()
    assert 0 < y.sum() < len(y)
    m = compute_bubble_importance(stack, y, "w")
    auc, se = ranking_auc(m.r, region)
    assert auc > 0.9
    assert (auc - 0.5) / se > 5
    assert np.median(m.p[region]) < 1e-3 < np.median(m.p[~region])


def test_accumulator_route_agrees():
    stack, y, _ = planted_experiment(120, seed=1)
    acc = CorrelationAccumulator(stack.shape[1:], 1)
    for f, yj in zip(stack, y):
        acc.update(f, [yj])
    a = importance_from_accumulator(acc, 0, "w")
    b = compute_bubble_importance(stack, y, "w")
    np.testing.assert_allclose(a.r, b.r, atol=1e-10)
    np.testing.assert_allclose(a.p, b.p, atol=1e-10)


def test_constant_intelligibility_gives_flat_map(caplog, rng):
    stack = rng.random((20, 3, 4))
    with caplog.at_level(logging.WARNING):
        m = compute_bubble_importance(stack, np.ones(20), "w")
    assert "constant" in caplog.text
    assert np.all(m.r == 0) and np.all(m.p == 1)


def test_shuffling_mixtures_leaves_map_unchanged(rng):
    stack = rng.random((50, 4, 4))
    y = rng.integers(0, 2, 50)
    perm = rng.permutation(50)
    a = compute_bubble_importance(stack, y)
    b = compute_bubble_importance(stack[perm], y[perm])
    np.testing.assert_allclose(a.r, b.r, atol=1e-12)
    np.testing.assert_allclose(a.p, b.p, atol=1e-12)


def test_threshold_bubble_map():
    r = np.array([[0.5, -0.5], [0.2, 0.0]])
    p = np.array([[0.001, 0.001], [0.2, 1.0]])
    m = ImportanceMap(r, p, "w")
    np.testing.assert_array_equal(threshold_bubble_map(m, 1.0).mask, [[True, False], [True, False]])
    np.testing.assert_array_equal(threshold_bubble_map(m, 0.01).mask, [[True, False], [False, False]])
    with pytest.raises(ValueError):
        threshold_bubble_map(m, 0.0)


@given(st.integers(0, 2**32 - 1), st.floats(1e-8, 1), st.floats(1e-8, 1))
def test_bubble_threshold_nesting(seed, t1, t2):
    rng = np.random.default_rng(seed)
    m = ImportanceMap(rng.uniform(-1, 1, (6, 6)), rng.random((6, 6)), "w")
    lo, hi = sorted([t1, t2])
    assert not np.any(threshold_bubble_map(m, lo).mask & ~threshold_bubble_map(m, hi).mask)


def two_tone(sr=16000):
    t = np.arange(sr) / sr
    floor = 1e-6 * np.random.default_rng(0).standard_normal(sr)  # keeps every smoothed value above zero
    return Waveform(np.sin(2 * np.pi * 500 * t) + 10 ** (-30 / 20) * np.sin(2 * np.pi * 4000 * t) + floor, sr)


def test_smoothed_energy_is_normalized():
    sm = smoothed_energy(two_tone())
    assert sm.max() == pytest.approx(1.0)
    assert sm.min() >= 0
    with pytest.raises(ValueError):
        smoothed_energy(Waveform(np.zeros(4000)))


def test_energy_map_keeps_only_the_louder_tone():
    w = two_tone()
    sm = smoothed_energy(w, coeff=0.0)
    freqs = stft(w).freq_axis
    span = WordSpan("w", "word", 10, 50)
    m = compute_energy_importance(sm, span, -15.0)
    kept = freqs[np.any(m.mask, axis=1)]
    assert kept.min() < 500 < kept.max() < 1500
    assert not np.any(m.mask[:, :10]) and not np.any(m.mask[:, 50:])


def test_energy_map_extremes():
    sm = smoothed_energy(two_tone())
    span = WordSpan("w", "word", 5, 20)
    assert not compute_energy_importance(sm, span, 20.0).mask.any()
    full = compute_energy_importance(sm, span, -300.0).mask
    assert full[:, 5:20].all() and not full[:, :5].any() and not full[:, 20:].any()


@given(st.floats(-80, 20), st.floats(-80, 20))
def test_energy_threshold_nesting(a, b):
    sm = smoothed_energy(two_tone())
    span = WordSpan("w", "word", 0, 30)
    lo, hi = sorted([a, b])
    assert not np.any(compute_energy_importance(sm, span, hi).mask & ~compute_energy_importance(sm, span, lo).mask)


def test_energy_map_errors(caplog):
    sm = np.ones((513, 10))
    with caplog.at_level(logging.WARNING):
        m = compute_energy_importance(sm, WordSpan("w", "x", 4, 4), -10)
    assert not m.mask.any() and "empty span" in caplog.text
    with pytest.raises(ValueError):
        compute_energy_importance(sm, WordSpan("w", "x", 4, 11), -10)
    with pytest.raises(ValueError):
        WordSpan("w", "x", 5, 3)


def test_intelligibility_table_validation():
    t = IntelligibilityTable(np.array([[0, 1], [1, 1]]), ("a", "b"))
    assert t.column(1).tolist() == [1, 1]
    with pytest.raises(ValueError):
        IntelligibilityTable(np.array([[0, 2]]), ("a", "b"))
    with pytest.raises(ValueError):
        IntelligibilityTable(np.array([[0, 1]]), ("a",))
