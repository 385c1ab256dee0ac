"""Bubble-noise probing: random audibility fields and the mixtures they render.

A field is a sum of Gaussian "bubbles" of noise suppression placed uniformly
in time and on the mel-warped frequency axis. Suppression adds in dB and is
clipped at ``floor_db``; audibility is suppression divided by ``floor_db``, so
0 means full-strength noise and 1 means the floor.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .dsp import StftConfig, Waveform, add_masked_noise, hz_to_mel, stft

FIELD_STREAM = 0
NOISE_STREAM = 1


@dataclass(frozen=True)
class BubbleFieldConfig:
    bubbles_per_second: float = 10.0
    sigma_time_ms: float = 80.0
    sigma_mel: float = 127.0
    floor_db: float = -80.0
    global_snr_db: float = -25.0

    def __post_init__(self):
        if self.bubbles_per_second < 0:
            raise ValueError("bubbles_per_second must be non-negative")
        if self.sigma_time_ms <= 0 or self.sigma_mel <= 0:
            raise ValueError("bubble widths must be positive")
        if self.floor_db >= 0:
            raise ValueError("floor_db must be negative")


@dataclass(frozen=True)
class AudibilityMap:
    values: np.ndarray
    seed: int
    mixture_id: str = ""
    centres: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)), repr=False)
    floor_db: float = -80.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.size and (v.min() < 0 or v.max() > 1):
            raise ValueError("audibility values must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_bubbles(self) -> int:
        return int(self.centres.shape[0])

    def noise_gain(self) -> np.ndarray:
        """Linear noise gain: the dB-domain complement of audibility."""
        return 10.0 ** (0.05 * self.floor_db * self.values)


@dataclass(frozen=True)
class MixtureRecord:
    utterance_id: str
    mixture_id: str
    seed: int
    n_bubbles: int
    config_hash: str
    wav_path: str | None = None
    gain: float = 1.0


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def grid_axes(shape, sample_rate: int = 16000, stft_cfg: StftConfig = StftConfig()):
    """Mel value of every frequency row and time (s) of every frame for an STFT grid."""
    n_freq, n_frames = shape
    if n_freq != stft_cfg.n_bins(sample_rate):
        raise ValueError(f"{n_freq} frequency rows do not match the STFT grid ({stft_cfg.n_bins(sample_rate)})")
    freqs = np.arange(n_freq) * sample_rate / stft_cfg.window_samples(sample_rate)
    times = np.arange(n_frames) * stft_cfg.hop_samples(sample_rate) / sample_rate
    return hz_to_mel(freqs), times


def _gauss(z):
    # tails below 1e-30 are flushed to zero; denormals make the product slow
    g = np.exp(-0.5 * np.minimum(z * z, 140.0))
    g[g < 1e-30] = 0.0
    return g


def suppression_db(centres, cfg: BubbleFieldConfig, mel_axis, time_axis) -> np.ndarray:
    """dB suppression field for bubbles at ``centres`` (rows of (time_s, mel))."""
    centres = np.asarray(centres, dtype=np.float64).reshape(-1, 2)
    sig_t = cfg.sigma_time_ms / 1000.0
    gm = _gauss((mel_axis[None, :] - centres[:, 1:2]) / cfg.sigma_mel)
    gt = _gauss((time_axis[None, :] - centres[:, 0:1]) / sig_t)
    return np.maximum(cfg.floor_db * (gm.T @ gt), cfg.floor_db)


def field_from_centres(centres, cfg, shape, seed=0, mixture_id="", sample_rate=16000, stft_cfg=StftConfig()):
    mel_axis, time_axis = grid_axes(shape, sample_rate, stft_cfg)
    supp = suppression_db(centres, cfg, mel_axis, time_axis)
    values = np.clip(supp / cfg.floor_db, 0.0, 1.0)
    return AudibilityMap(values, seed, mixture_id, np.asarray(centres, dtype=np.float64).reshape(-1, 2), cfg.floor_db)


def generate_bubble_field(
    seed: int,
    cfg: BubbleFieldConfig,
    shape,
    duration_s: float,
    mixture_id: str = "",
    sample_rate: int = 16000,
    stft_cfg: StftConfig = StftConfig(),
) -> AudibilityMap:
    rng = stream_rng(seed, FIELD_STREAM)
    n = rng.poisson(cfg.bubbles_per_second * duration_s)
    mel_max = float(hz_to_mel(sample_rate / 2))
    centres = np.column_stack([rng.uniform(0.0, duration_s, n), rng.uniform(0.0, mel_max, n)])
    return field_from_centres(centres, cfg, shape, seed, mixture_id, sample_rate, stft_cfg)


def render_bubble_mixture(
    clean: Waveform,
    audibility: AudibilityMap,
    cfg: BubbleFieldConfig,
    stft_cfg: StftConfig = StftConfig(),
) -> Waveform:
    shape = stft(clean, stft_cfg).shape
    if audibility.shape != shape:
        raise ValueError(f"audibility shape {audibility.shape} does not match the utterance STFT {shape}")
    rng = stream_rng(audibility.seed, NOISE_STREAM)
    return add_masked_noise(clean, audibility.noise_gain(), rng, cfg.global_snr_db, stft_cfg)


def mixture_seed(base_seed: int, utterance_id: str, index: int) -> int:
    """Per-mixture seed derived from the experiment seed, utterance id and mixture index."""
    key = int.from_bytes(hashlib.sha256(utterance_id.encode("utf-8")).digest()[:8], "little")
    ss = np.random.SeedSequence([base_seed, key, index])
    return int(ss.generate_state(1, dtype=np.uint32)[0])
