"""LeRF / MoRF noise masks for bubble p-value maps and smoothed-energy maps.

Every mask is ``10 ** (0.05 * clip(q, d0, d1))`` for a dB ramp ``q`` that is
linear in the p-value (bubble) or in the normalized magnitude (energy). MoRF
ramps are the negation of the LeRF ramps, which makes the two variants mirror
images about the threshold.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dsp import StftConfig, Waveform, add_masked_noise, db_to_magnitude

LERF = "lerf"
MORF = "morf"
BUBBLE = "bubble"
ENERGY = "energy"


@dataclass(frozen=True)
class MaskConfig:
    """``threshold`` is a p-value for the bubble method and a linear magnitude for the energy method."""

    threshold: float
    alpha: float = 0.5
    d0: float = -80.0
    d1: float = 0.0
    variant: str = LERF
    method: str = BUBBLE

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.d0 < self.d1:
            raise ValueError(f"need d0 < d1, got d0={self.d0}, d1={self.d1}")
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.variant not in (LERF, MORF):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.method not in (BUBBLE, ENERGY):
            raise ValueError(f"unknown method {self.method!r}")

    @classmethod
    def energy(cls, threshold_db: float, **kw) -> "MaskConfig":
        return cls(threshold=float(db_to_magnitude(threshold_db)), method=ENERGY, **kw)

    @property
    def floor(self) -> float:
        return float(db_to_magnitude(self.d0))

    @property
    def ceiling(self) -> float:
        return float(db_to_magnitude(self.d1))

    @property
    def cut(self) -> float:
        """Mask value above which a point counts as noised: the dB midpoint of the ramp."""
        return float(db_to_magnitude(0.5 * (self.d0 + self.d1)))


@dataclass(frozen=True)
class NoiseMask:
    values: np.ndarray
    config: MaskConfig

    @property
    def shape(self):
        return self.values.shape


def bubble_ramp_db(p, t: float, alpha: float, d0: float, d1: float) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    return -(d1 - d0) * (p - t) / (t * alpha - t)


def energy_ramp_db(a, t: float, alpha: float, d0: float, d1: float) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return (d1 - d0) * (a - t) / (alpha * t - t)


def _to_mask(q, cfg: MaskConfig) -> np.ndarray:
    return db_to_magnitude(np.clip(q, cfg.d0, cfg.d1))


def lerf_mask_bubble(p_map, cfg: MaskConfig) -> NoiseMask:
    cfg = replace(cfg, variant=LERF, method=BUBBLE)
    q = bubble_ramp_db(p_map, cfg.threshold, cfg.alpha, cfg.d0, cfg.d1)
    return NoiseMask(_to_mask(q, cfg), cfg)


def morf_mask_bubble(p_map, cfg: MaskConfig) -> NoiseMask:
    cfg = replace(cfg, variant=MORF, method=BUBBLE)
    q = -bubble_ramp_db(p_map, cfg.threshold, cfg.alpha, cfg.d0, cfg.d1)
    return NoiseMask(_to_mask(q, cfg), cfg)


def _span_frames(shape, span):
    inside = np.zeros(shape, dtype=bool)
    if span is None:
        inside[:] = True
    else:
        start, end = span
        inside[:, start:end] = True
    return inside


def lerf_mask_energy(smoothed_mag, cfg: MaskConfig, span=None) -> NoiseMask:
    """Energy-method LeRF mask; frames outside ``span`` = (start, end) get the ceiling."""
    cfg = replace(cfg, variant=LERF, method=ENERGY)
    a = np.asarray(smoothed_mag, dtype=np.float64)
    q = energy_ramp_db(a, cfg.threshold, cfg.alpha, cfg.d0, cfg.d1)
    q = np.where(_span_frames(a.shape, span), q, cfg.d1)
    return NoiseMask(_to_mask(q, cfg), cfg)


def morf_mask_energy(smoothed_mag, cfg: MaskConfig, span=None) -> NoiseMask:
    """Energy-method MoRF mask; frames outside ``span`` = (start, end) get the floor."""
    cfg = replace(cfg, variant=MORF, method=ENERGY)
    a = np.asarray(smoothed_mag, dtype=np.float64)
    q = -energy_ramp_db(a, cfg.threshold, cfg.alpha, cfg.d0, cfg.d1)
    q = np.where(_span_frames(a.shape, span), q, cfg.d0)
    return NoiseMask(_to_mask(q, cfg), cfg)


def make_mask(field, cfg: MaskConfig, span=None) -> NoiseMask:
    """Dispatch on ``cfg.method`` / ``cfg.variant``.

    ``field`` is the p-value map for the bubble method and the
    normalized smoothed magnitude for the energy method.
    """
    if cfg.method == BUBBLE:
        return (lerf_mask_bubble if cfg.variant == LERF else morf_mask_bubble)(field, cfg)
    return (lerf_mask_energy if cfg.variant == LERF else morf_mask_energy)(field, cfg, span)


def render_masked_mixture(
    clean: Waveform,
    mask: NoiseMask,
    noise_seed: int,
    noise_level_db: float = -25.0,
    stft_cfg: StftConfig = StftConfig(),
) -> Waveform:
    rng = np.random.default_rng(np.random.SeedSequence(noise_seed, spawn_key=(1,)))
    return add_masked_noise(clean, mask.values, rng, noise_level_db, stft_cfg)
