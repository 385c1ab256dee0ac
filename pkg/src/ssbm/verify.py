"""Built-in end-to-end check on the synthetic corpus with the oracle recognizer.

The AUC bound below was calibrated once from a pilot run of exactly this
configuration and is frozen here; it is not re-derived at run time.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formats
from .bubble_noise import BubbleFieldConfig
from .config import ExperimentConfig
from .masks import BUBBLE, ENERGY, LERF, MORF
from .metrics import phoneme_stats, phoneme_trend, ranking_auc, sweep_thresholds
from .pipeline import Experiment, accuracy_curves, load_importance
from .synth import SyntheticCorpusConfig, write_corpus

# Pilot (seed 0, 10 utterances x 1000 mixtures): mean AUC 0.9973, min 0.9875,
# smallest z 272. The bound sits below the pilot mean with margin for seed changes.
AUC_BOUND = 0.99
MIN_AUC_Z = 5.0
SMALL_PHONEMES = 2
LARGE_PHONEMES = 8


def verify_bubbles() -> BubbleFieldConfig:
    # denser, narrower bubbles than the probing defaults so the p-values of
    # the small planted regions stay inside the 1e-8..1 threshold grid
    return BubbleFieldConfig(bubbles_per_second=80.0, sigma_time_ms=40.0, sigma_mel=64.0)


def verify_config(seed: int = 0) -> ExperimentConfig:
    return ExperimentConfig(seed=seed, n_mixtures=1000, bubble=verify_bubbles())


def verify_corpus() -> SyntheticCorpusConfig:
    return SyntheticCorpusConfig(n_utterances=10)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def word_aucs(ex: Experiment) -> list:
    """(word_id, auc, se) per word: the correlation map ranked against the planted region."""
    out = []
    for entry in ex.entries:
        utt = ex.utterance(entry.utterance_id)
        maps, _ = load_importance(utt, ex.stage_dir("importance") / utt.utterance_id, ex.run_id)
        for k, m in enumerate(maps):
            auc, se = ranking_auc(m.r, utt.planted[k])
            out.append((m.word_id, auc, se))
    return out


def check_auc(aucs, bound: float = AUC_BOUND, min_z: float = MIN_AUC_Z) -> list:
    values = np.array([a for _, a, _ in aucs])
    z = np.array([(a - 0.5) / se if se > 0 else math.inf for _, a, se in aucs])
    return [
        Check("auc_mean", bool(values.mean() >= bound),
              f"mean AUC {values.mean():.4f} (min {values.min():.4f}) vs bound {bound}"),
        Check("auc_significance", bool(z.min() >= min_z),
              f"smallest (AUC - 0.5)/SE = {z.min():.1f} over {len(aucs)} words, need >= {min_z}"),
    ]


def check_ssbm(records) -> Check:
    sweep = sweep_thresholds(records)
    tb, sb = sweep.best(BUBBLE)
    te, se = sweep.best(ENERGY)
    ok = not math.isnan(sb) and (math.isnan(se) or sb > se)
    return Check("ssbm_ordering", ok, f"bubble best {sb:.3f} at p={tb:g}; energy best {se:.3f} at {te:g} dB")


def check_curves(records, method: str = BUBBLE) -> Check:
    curves = accuracy_curves(records)
    lerf, morf = curves[(method, LERF)], curves[(method, MORF)]
    matched = sorted(set(lerf.bins) & set(morf.bins))
    if not matched:
        return Check("lerf_above_morf", False, "no obscured-energy bin holds both LeRF and MoRF masks")
    gaps = np.array([lerf.accuracy(b) - morf.accuracy(b) for b in matched])
    ok = bool(np.all(gaps >= 0) and gaps.mean() > 0)
    return Check("lerf_above_morf", ok,
                 f"{len(matched)} matched bins, min gap {gaps.min():+.3f}, mean gap {gaps.mean():+.3f}")


def check_trend(records) -> Check:
    trend = phoneme_trend(phoneme_stats(records, BUBBLE))
    small, large = trend.mean(SMALL_PHONEMES, LERF), trend.mean(LARGE_PHONEMES, LERF)
    ok = not (math.isnan(small) or math.isnan(large)) and large > small
    return Check("size_trend", ok,
                 f"mean LeRF transition: {LARGE_PHONEMES} phonemes {large:.3g}, {SMALL_PHONEMES} phonemes {small:.3g}")


def run_verify(out_dir, cfg: ExperimentConfig | None = None, corpus_cfg: SyntheticCorpusConfig | None = None,
               workers: int = 1, resume: bool = False) -> list:
    out_dir = Path(out_dir)
    cfg = cfg or verify_config()
    corpus_cfg = corpus_cfg or verify_corpus()
    manifest = write_corpus(out_dir / "corpus", corpus_cfg, cfg.stft)
    ex = Experiment(cfg, manifest, out_dir, workers=workers, resume=resume)
    ex.run_all()
    records = ex.records()
    checks = check_auc(word_aucs(ex)) + [check_ssbm(records), check_curves(records), check_trend(records)]
    payload = {"config_hash": ex.run_id, "checks": [c.__dict__ for c in checks]}
    formats.atomic_write_text(out_dir / "report" / "verify.json", json.dumps(payload, indent=2) + "\n")
    return checks
