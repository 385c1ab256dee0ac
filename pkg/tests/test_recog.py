import logging
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssbm.recog import (
    AdapterConfig,
    OracleConfig,
    RecognizerError,
    normalize_text,
    oracle_recognize,
    read_hypothesis_file,
    revealed_fraction,
    run_external_batch,
    score_words,
    unnoised_from_audibility,
    unnoised_from_gain,
)

STUB = Path(__file__).with_name("stub_recognizer.py")


def best_alignment_bruteforce(ref, hyp):
    """(edits, matches) of the best alignment, by exhaustive recursion over every path."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(ref):
            return (len(hyp) - j, 0)
        if j == len(hyp):
            return (len(ref) - i, 0)
        options = []
        e, m = go(i + 1, j + 1)
        if ref[i] == hyp[j]:
            options.append((e, m + 1))
        else:
            options.append((e + 1, m))
        e, m = go(i + 1, j)
        options.append((e + 1, m))
        e, m = go(i, j + 1)
        options.append((e + 1, m))
        return min(options, key=lambda o: (o[0], -o[1]))

    return go(0, 0)


words = st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=1, max_size=6)


@given(words, st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=6))
def test_scores_match_bruteforce_alignment(ref, hyp):
    scores = score_words(ref, hyp)
    assert len(scores) == len(ref)
    _, matches = best_alignment_bruteforce(tuple(ref), tuple(hyp))
    assert sum(scores) == matches
    for w, s in zip(ref, scores):
        if s:
            assert w in hyp


def test_scoring_examples():
    assert score_words("the cat sat", "the cat sat") == [1, 1, 1]
    assert score_words("the cat sat", "") == [0, 0, 0]
    assert score_words("the cat sat", "the dog sat") == [1, 0, 1]
    assert score_words("the cat sat", "the big cat sat") == [1, 1, 1]
    assert score_words("the cat sat", "cat") == [0, 1, 0]
    assert score_words("a b c", "a c") == [1, 0, 1]
    assert score_words("a b c", "x y z") == [0, 0, 0]


def test_ties_go_to_the_latest_position():
    assert score_words("a a", "a") == [0, 1]
    assert score_words("a b a", "a") == [0, 0, 1]


@given(words, st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=6), words)
def test_identical_suffix_scores_one(ref, hyp, suffix):
    scores = score_words(ref + suffix, hyp + suffix)
    assert scores[len(ref):] == [1] * len(suffix)
    assert score_words("The Cat, sat!", "the cat sat") == [1, 1, 1]
    assert score_words("The Cat", "the cat", normalize=False) == [0, 0]
    with pytest.raises(ValueError):
        score_words("", "x")


def test_normalize_text_keeps_apostrophes():
    assert normalize_text("Don't STOP, 'now'!") == ["don't", "stop", "now"]


def small_oracle():
    region_a = np.zeros((4, 6), dtype=bool)
    region_a[:2, :3] = True
    region_b = np.zeros((4, 6), dtype=bool)
    region_b[2:, 3:] = True
    return OracleConfig([region_a, region_b], reveal_threshold=0.6)


def test_oracle_thresholding():
    oracle = small_oracle()
    power = np.ones((4, 6))
    unnoised = np.zeros((4, 6), dtype=bool)
    unnoised[:2, :2] = True  # 4 of 6 points of word a, none of word b
    assert revealed_fraction(unnoised, oracle.planted_maps[0], power) == pytest.approx(4 / 6)
    assert oracle_recognize(unnoised, power, oracle) == [1, 0]
    unnoised[:2, :2] = False
    unnoised[0, :3] = True  # 3 of 6 points
    assert oracle_recognize(unnoised, power, oracle) == [0, 0]


def test_oracle_weights_by_energy():
    oracle = small_oracle()
    power = np.ones((4, 6))
    power[0, 0] = 100.0
    unnoised = np.zeros((4, 6), dtype=bool)
    unnoised[0, 0] = True
    assert oracle_recognize(unnoised, power, oracle) == [1, 0]


def test_oracle_unnoised_helpers():
    oracle = small_oracle()
    np.testing.assert_array_equal(unnoised_from_gain(np.array([1e-4, 0.01, 1.0]), oracle), [True, False, False])
    np.testing.assert_array_equal(unnoised_from_audibility(np.array([0.2, 0.5, 0.9]), oracle), [False, False, True])


def test_oracle_validation():
    with pytest.raises(ValueError):
        OracleConfig([np.zeros((2, 2), dtype=bool)])
    with pytest.raises(ValueError):
        OracleConfig([np.ones((2, 2), dtype=bool)], reveal_threshold=1.0)
    with pytest.raises(ValueError):
        oracle_recognize(np.ones((3, 3), dtype=bool), np.ones((4, 6)), small_oracle())


def cmd(mode, text=""):
    return f"{sys.executable} {STUB} {mode} {{job}} {{out}} '{text}'"


def test_external_batch_round_trip(tmp_path):
    items = [("m1", "/x/a.wav"), ("m2", "/x/b.wav")]
    recs = run_external_batch(items, AdapterConfig(cmd("echo", "hello world")), tmp_path)
    assert [(r.mixture_id, r.hypothesis) for r in recs] == [("m1", "hello world"), ("m2", "hello world")]
    assert (tmp_path / "job.tsv").read_text().splitlines() == ["m1\t/x/a.wav", "m2\t/x/b.wav"]


def test_external_failure_reports_stderr(tmp_path):
    with pytest.raises(RecognizerError, match="decoder exploded"):
        run_external_batch([("m1", "a.wav")], AdapterConfig(cmd("fail")), tmp_path)


def test_external_malformed_output(tmp_path):
    with pytest.raises(RecognizerError, match="malformed"):
        run_external_batch([("m1", "a.wav")], AdapterConfig(cmd("malformed")), tmp_path)


def test_external_missing_ids_are_empty(tmp_path, caplog):
    items = [(f"m{i}", f"{i}.wav") for i in range(4)]
    with caplog.at_level(logging.WARNING):
        recs = run_external_batch(items, AdapterConfig(cmd("partial", "yes")), tmp_path)
    assert [r.hypothesis for r in recs] == ["yes", "", "yes", ""]
    assert "2 of 4" in caplog.text


def test_external_missing_command(tmp_path):
    with pytest.raises(RecognizerError):
        run_external_batch([("m1", "a.wav")], AdapterConfig("/no/such/binary {job} {out}"), tmp_path)


def test_read_hypothesis_file(tmp_path):
    f = tmp_path / "h.tsv"
    f.write_text("a\tone two\n\nb\t\n")
    assert read_hypothesis_file(f) == {"a": "one two", "b": ""}
    f.write_text("\tno id\n")
    with pytest.raises(RecognizerError):
        read_hypothesis_file(f)


def test_oracle_half_energy_split():
    region = np.zeros((4, 6), dtype=bool)
    region[:, :2] = True
    power = np.ones((4, 6))
    power[:, 0] = 3.0
    power[:2, 0] = 1.0
    gain = np.full((4, 6), 1e-4)
    noised = np.zeros((4, 6), dtype=bool)
    noised[2:, 0] = True  # 6 of the region's 12 energy units
    gain[noised] = 1.0
    for theta, want in ((0.6, [0]), (0.4, [1])):
        oracle = OracleConfig([region], reveal_threshold=theta)
        assert oracle_recognize(unnoised_from_gain(gain, oracle), power, oracle) == want


def test_oracle_all_floor_and_ceiling():
    oracle = small_oracle()
    power = np.ones((4, 6))
    assert oracle_recognize(unnoised_from_gain(np.full((4, 6), 1e-4), oracle), power, oracle) == [1, 1]
    assert oracle_recognize(unnoised_from_gain(np.ones((4, 6)), oracle), power, oracle) == [0, 0]


@given(st.integers(0, 2**32 - 1))
def test_oracle_monotone_in_revealed_points(seed):
    rng = np.random.default_rng(seed)
    oracle = small_oracle()
    power = rng.random((4, 6))
    a = rng.random((4, 6)) < 0.5
    b = a | (rng.random((4, 6)) < 0.3)
    sa, sb = oracle_recognize(a, power, oracle), oracle_recognize(b, power, oracle)
    assert all(y >= x for x, y in zip(sa, sb))
    assert sa == oracle_recognize(a.copy(), power.copy(), oracle)
