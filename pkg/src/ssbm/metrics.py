"""Energy bookkeeping, the SSBM score and its threshold sweeps, and the per-word analyses."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

DEFAULT_CUT = 10.0 ** (0.05 * -40.0)


def energy_drop_fraction(power, mask, mask_cut: float = DEFAULT_CUT, continuous: bool = False) -> float:
    """Fraction of utterance energy under noised mask points.

    A point is dropped when its mask value exceeds ``mask_cut``. With
    ``continuous=True`` each point is weighted by the mask value instead.
    """
    power = np.asarray(power, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if power.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} does not match spectrogram {power.shape}")
    total = power.sum()
    if total <= 0:
        raise ValueError("utterance has zero energy")
    weight = mask if continuous else (mask > mask_cut)
    return float(np.clip((weight * power).sum() / total, 0.0, 1.0))


def delta_lerf(a_w: float, a_o: float, e_lerf: float) -> float:
    """Accuracy gap per unit of preserved energy; NaN when no energy is preserved."""
    if not e_lerf < 1:
        return math.nan
    return (a_w - a_o) / (1.0 - e_lerf)


def delta_morf(a_o: float, a_w: float, e_morf: float) -> float:
    """Accuracy gap per unit of dropped important energy; NaN when nothing is dropped."""
    if not e_morf > 0:
        return math.nan
    return (a_o - a_w) / e_morf


@dataclass(frozen=True)
class EvalRecord:
    """Outcome of the LeRF and the MoRF renderings for one (word, method, threshold) cell.

    ``threshold`` is the grid value: a p-value for the bubble method, dB for the energy method.
    """

    utterance_id: str
    word_index: int
    word: str
    method: str
    threshold: float
    a_w_lerf: float
    a_o_lerf: float
    e_lerf: float
    a_w_morf: float
    a_o_morf: float
    e_morf: float
    phoneme_count: int | None = None

    @property
    def word_id(self) -> str:
        return f"{self.utterance_id}:{self.word_index}"

    @property
    def delta_lerf(self) -> float:
        return delta_lerf(self.a_w_lerf, self.a_o_lerf, self.e_lerf)

    @property
    def delta_morf(self) -> float:
        return delta_morf(self.a_o_morf, self.a_w_morf, self.e_morf)


@dataclass(frozen=True)
class SweepRow:
    method: str
    threshold: float
    mean_delta_lerf: float
    mean_delta_morf: float
    ssbm: float
    n_lerf: int
    n_morf: int
    excluded_lerf: int
    excluded_morf: int


@dataclass
class SSBMReport:
    rows: list = field(default_factory=list)

    def for_method(self, method: str) -> list:
        return [r for r in self.rows if r.method == method]

    def best(self, method: str):
        """(threshold, ssbm) maximizing SSBM; ties go to the smaller threshold."""
        rows = [r for r in self.for_method(method) if not math.isnan(r.ssbm)]
        if not rows:
            return None, math.nan
        top = max(r.ssbm for r in rows)
        winner = min((r for r in rows if r.ssbm == top), key=lambda r: r.threshold)
        return winner.threshold, winner.ssbm

    @property
    def methods(self) -> list:
        return sorted({r.method for r in self.rows})


def _defined_mean(values):
    vals = [v for v in values if not math.isnan(v)]
    return (float(np.mean(vals)) if vals else math.nan), len(vals), len(values) - len(vals)


def sweep_thresholds(records) -> SSBMReport:
    groups = defaultdict(list)
    for rec in records:
        groups[(rec.method, rec.threshold)].append(rec)
    report = SSBMReport()
    for (method, threshold) in sorted(groups):
        recs = groups[(method, threshold)]
        ml, nl, xl = _defined_mean([r.delta_lerf for r in recs])
        mm, nm, xm = _defined_mean([r.delta_morf for r in recs])
        report.rows.append(SweepRow(method, threshold, ml, mm, ml + mm, nl, nm, xl, xm))
    return report


@dataclass
class AccuracyCurve:
    """Mean word accuracy by obscured-energy percent (only bins that received data)."""

    bins: dict = field(default_factory=dict)

    def accuracy(self, percent: int) -> float:
        return self.bins[percent][0]

    def percents(self) -> list:
        return sorted(self.bins)


def accuracy_by_energy_bin(fractions, accuracies) -> AccuracyCurve:
    fractions = np.asarray(fractions, dtype=np.float64)
    accuracies = np.asarray(accuracies, dtype=np.float64)
    if fractions.shape != accuracies.shape:
        raise ValueError("fractions and accuracies must have the same length")
    if np.any((fractions < 0) | (fractions > 1)):
        raise ValueError("obscured-energy fractions must lie in [0, 1]")
    sums = defaultdict(float)
    counts = defaultdict(int)
    # round half up, so 0.885 -> 89 regardless of float representation quirks of np.round
    keys = np.floor(100.0 * fractions + 0.5).astype(int)
    for key, acc in zip(keys, accuracies):
        sums[int(key)] += float(acc)
        counts[int(key)] += 1
    return AccuracyCurve({k: (sums[k] / counts[k], counts[k]) for k in sorted(counts)})


def transition_threshold(grid, correct, variant: str):
    """Grid threshold where a word settles into correct recognition.

    LeRF: the smallest threshold from which the word stays correct for every
    larger one. MoRF: the largest threshold up to which it is correct for every
    smaller one. ``None`` when no such threshold exists.
    """
    grid = list(grid)
    correct = [bool(c) for c in correct]
    if len(grid) != len(correct):
        raise ValueError("grid and correctness have different lengths")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted ascending")
    if variant == "lerf":
        idx = None
        for i in range(len(grid) - 1, -1, -1):
            if not correct[i]:
                break
            idx = i
    elif variant == "morf":
        idx = None
        for i in range(len(grid)):
            if not correct[i]:
                break
            idx = i
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return None if idx is None else grid[idx]


@dataclass(frozen=True)
class PhonemeStat:
    word_id: str
    phoneme_count: int
    lerf_threshold: float | None
    morf_threshold: float | None


def phoneme_stats(records, method: str = "bubble") -> list:
    by_word = defaultdict(list)
    for rec in records:
        if rec.method == method and rec.phoneme_count is not None:
            by_word[rec.word_id].append(rec)
    stats = []
    for word_id in sorted(by_word):
        recs = sorted(by_word[word_id], key=lambda r: r.threshold)
        grid = [r.threshold for r in recs]
        stats.append(PhonemeStat(
            word_id,
            recs[0].phoneme_count,
            transition_threshold(grid, [r.a_w_lerf >= 0.5 for r in recs], "lerf"),
            transition_threshold(grid, [r.a_w_morf >= 0.5 for r in recs], "morf"),
        ))
    return stats


@dataclass(frozen=True)
class TrendRow:
    phoneme_count: int
    variant: str
    mean_threshold: float
    mean_log10_threshold: float
    count: int


@dataclass
class PhonemeTrend:
    rows: list
    excluded: dict

    @property
    def empty(self) -> bool:
        return not self.rows

    def mean(self, phoneme_count: int, variant: str = "lerf") -> float:
        for row in self.rows:
            if row.phoneme_count == phoneme_count and row.variant == variant:
                return row.mean_threshold
        return math.nan


def phoneme_trend(stats) -> PhonemeTrend:
    rows = []
    excluded = {"lerf": 0, "morf": 0}
    for variant in ("lerf", "morf"):
        groups = defaultdict(list)
        for s in stats:
            value = s.lerf_threshold if variant == "lerf" else s.morf_threshold
            if value is None:
                excluded[variant] += 1
            else:
                groups[s.phoneme_count].append(value)
        for count in sorted(groups):
            vals = np.asarray(groups[count], dtype=np.float64)
            with np.errstate(divide="ignore"):
                logs = np.log10(vals)
            rows.append(TrendRow(count, variant, float(vals.mean()), float(logs.mean()), int(vals.size)))
    return PhonemeTrend(rows, excluded)


def ranking_auc(scores, labels) -> tuple:
    """Mann-Whitney AUC of ``scores`` against boolean ``labels``, with its Hanley-McNeil standard error."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative labels")
    ranks = rankdata(scores)
    auc = (ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    q1 = auc / (2 - auc)
    q2 = 2 * auc * auc / (1 + auc)
    var = (auc * (1 - auc) + (n_pos - 1) * (q1 - auc * auc) + (n_neg - 1) * (q2 - auc * auc)) / (n_pos * n_neg)
    return float(auc), float(math.sqrt(max(var, 0.0)))
