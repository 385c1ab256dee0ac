"""Per-word importance maps: bubble correlation analysis and the smoothed-energy baseline."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dsp import MelFilterbank, StftConfig, Waveform, mel_smooth, pre_emphasis, stft
from .stats import CorrelationAccumulator, point_biserial_map

log = logging.getLogger(__name__)

BUBBLE = "bubble"
ENERGY = "energy"


@dataclass(frozen=True)
class WordSpan:
    """A word's frames ``[start_frame, end_frame)`` on the STFT grid."""

    word_id: str
    text: str
    start_frame: int
    end_frame: int
    phoneme_count: int | None = None

    def __post_init__(self):
        if not 0 <= self.start_frame <= self.end_frame:
            raise ValueError(f"invalid span [{self.start_frame}, {self.end_frame}) for word {self.word_id!r}")

    @property
    def empty(self) -> bool:
        return self.end_frame == self.start_frame


@dataclass(frozen=True)
class IntelligibilityTable:
    values: np.ndarray
    words: tuple

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[1] != len(self.words):
            raise ValueError(f"table shape {v.shape} does not match {len(self.words)} words")
        if not np.all((v == 0) | (v == 1)):
            raise ValueError("intelligibility entries must be 0 or 1")
        object.__setattr__(self, "values", v.astype(np.int8))

    def column(self, k: int) -> np.ndarray:
        return self.values[:, k]


@dataclass(frozen=True)
class ImportanceMap:
    r: np.ndarray
    p: np.ndarray
    word_id: str
    method: str = BUBBLE


@dataclass(frozen=True)
class BinaryImportanceMap:
    mask: np.ndarray
    threshold: float

    @property
    def shape(self):
        return self.mask.shape


def compute_bubble_importance(audibility_stack, intelligibility, word_id: str = "") -> ImportanceMap:
    """Point-biserial correlation at every time-frequency point across J mixtures."""
    stack = np.asarray(audibility_stack, dtype=np.float64)
    y = np.asarray(intelligibility, dtype=np.float64)
    if y.min() == y.max():
        log.warning("intelligibility of word %r is constant over %d mixtures; map is empty", word_id, y.size)
    r, p = point_biserial_map(stack, y)
    return ImportanceMap(r, p, word_id, BUBBLE)


def importance_from_accumulator(acc: CorrelationAccumulator, k: int, word_id: str = "") -> ImportanceMap:
    if acc.is_constant(k):
        log.warning("intelligibility of word %r is constant over %d mixtures; map is empty", word_id, acc.n)
    r, p = acc.result(k)
    return ImportanceMap(r, p, word_id, BUBBLE)


def threshold_bubble_map(m: ImportanceMap, t: float) -> BinaryImportanceMap:
    if not 0 < t <= 1:
        raise ValueError(f"p-value threshold must lie in (0, 1], got {t}")
    return BinaryImportanceMap((m.r > 0) & (m.p < t), t)


def smoothed_energy(
    clean: Waveform,
    stft_cfg: StftConfig = StftConfig(),
    n_mels: int = 30,
    coeff: float = 0.97,
) -> np.ndarray:
    """Mel-smoothed, pre-emphasized magnitude normalized to a maximum of 1."""
    spec = stft(pre_emphasis(clean, coeff), stft_cfg)
    fb = MelFilterbank.for_spectrogram(spec, n_mels)
    sm = mel_smooth(spec.magnitude(), fb)
    peak = sm.max()
    if peak <= 0:
        raise ValueError("cannot compute the energy baseline of a silent utterance")
    return sm / peak


def compute_energy_importance(smoothed: np.ndarray, span: WordSpan, t_db: float) -> BinaryImportanceMap:
    """Points of the word span whose normalized smoothed magnitude exceeds ``t_db``."""
    smoothed = np.asarray(smoothed, dtype=np.float64)
    if span.end_frame > smoothed.shape[1]:
        raise ValueError(f"span of {span.word_id!r} ends at frame {span.end_frame}, beyond {smoothed.shape[1]}")
    mask = np.zeros(smoothed.shape, dtype=bool)
    if span.empty:
        log.warning("word %r has an empty span; energy map is empty", span.word_id)
        return BinaryImportanceMap(mask, t_db)
    t = 10.0 ** (0.05 * t_db)
    sl = slice(span.start_frame, span.end_frame)
    mask[:, sl] = smoothed[:, sl] > t
    return BinaryImportanceMap(mask, t_db)

