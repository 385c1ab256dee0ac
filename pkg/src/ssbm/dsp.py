"""Waveform/spectrogram transforms shared by every other module.

All frames are centred: the signal is zero-padded by half a window at both
ends, so frame ``t`` is centred on sample ``t * hop``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DB_FLOOR = -300.0


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: int = 16000

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"waveform must be 1-D, got shape {samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class StftConfig:
    window_ms: float = 64.0
    hop_ms: float = 16.0
    window_kind: str = "hann"
    center: bool = True

    def __post_init__(self):
        if self.hop_ms <= 0 or self.window_ms <= 0:
            raise ValueError("window_ms and hop_ms must be positive")
        if self.hop_ms > self.window_ms:
            raise ValueError(f"hop_ms ({self.hop_ms}) exceeds window_ms ({self.window_ms})")
        if self.window_kind not in _WINDOWS:
            raise ValueError(f"unknown window kind {self.window_kind!r}; choose from {sorted(_WINDOWS)}")

    def window_samples(self, sample_rate: int) -> int:
        return int(round(self.window_ms * sample_rate / 1000.0))

    def hop_samples(self, sample_rate: int) -> int:
        return int(round(self.hop_ms * sample_rate / 1000.0))

    def window(self, sample_rate: int) -> np.ndarray:
        return _WINDOWS[self.window_kind](self.window_samples(sample_rate))

    def n_bins(self, sample_rate: int) -> int:
        return self.window_samples(sample_rate) // 2 + 1

    def n_frames(self, n_samples: int, sample_rate: int) -> int:
        n_win = self.window_samples(sample_rate)
        hop = self.hop_samples(sample_rate)
        padded = n_samples + (2 * (n_win // 2) if self.center else 0)
        if padded < n_win:
            raise ValueError(
                f"window of {n_win} samples is longer than the padded signal ({padded} samples)"
            )
        return 1 + -(-(padded - n_win) // hop)


def _periodic_hann(n):
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def _periodic_hamming(n):
    return 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(n) / n)


_WINDOWS = {
    "hann": _periodic_hann,
    "sqrt_hann": lambda n: np.sqrt(_periodic_hann(n)),
    "hamming": _periodic_hamming,
    "boxcar": np.ones,
}


@dataclass(frozen=True)
class ComplexSpectrogram:
    """F x T complex STFT plus what is needed to invert it."""

    bins: np.ndarray
    sample_rate: int
    config: StftConfig
    length: int

    @property
    def shape(self):
        return self.bins.shape

    @property
    def freq_axis(self) -> np.ndarray:
        n_win = self.config.window_samples(self.sample_rate)
        return np.arange(self.bins.shape[0]) * self.sample_rate / n_win

    @property
    def frame_axis(self) -> np.ndarray:
        return np.arange(self.bins.shape[1]) * self.config.hop_samples(self.sample_rate) / self.sample_rate

    def magnitude(self) -> np.ndarray:
        return np.abs(self.bins)

    def power(self) -> np.ndarray:
        return self.bins.real ** 2 + self.bins.imag ** 2

    def with_bins(self, bins: np.ndarray) -> "ComplexSpectrogram":
        bins = np.asarray(bins)
        if bins.shape != self.bins.shape:
            raise ValueError(f"shape mismatch: {bins.shape} vs {self.bins.shape}")
        return ComplexSpectrogram(bins, self.sample_rate, self.config, self.length)


def pre_emphasis(w: Waveform, coeff: float = 0.97) -> Waveform:
    if not 0 <= coeff < 1:
        raise ValueError(f"pre-emphasis coefficient must lie in [0, 1), got {coeff}")
    x = w.samples
    out = x.copy()
    out[1:] -= coeff * x[:-1]
    return Waveform(out, w.sample_rate)


def _frames(x: np.ndarray, n_win: int, hop: int, n_frames: int) -> np.ndarray:
    need = (n_frames - 1) * hop + n_win
    x = np.pad(x, (0, need - x.shape[0]))
    return np.lib.stride_tricks.sliding_window_view(x, n_win)[::hop][:n_frames]


def stft(w: Waveform, cfg: StftConfig = StftConfig()) -> ComplexSpectrogram:
    if len(w) == 0:
        raise ValueError("cannot take the STFT of an empty waveform")
    sr = w.sample_rate
    n_win = cfg.window_samples(sr)
    hop = cfg.hop_samples(sr)
    n_frames = cfg.n_frames(len(w), sr)
    x = np.pad(w.samples, n_win // 2) if cfg.center else w.samples
    frames = _frames(x, n_win, hop, n_frames) * cfg.window(sr)
    bins = np.fft.rfft(frames, axis=1).T
    return ComplexSpectrogram(np.ascontiguousarray(bins), sr, cfg, len(w))


def _ola_envelope(window: np.ndarray, hop: int, n_frames: int) -> np.ndarray:
    n_win = window.shape[0]
    env = np.zeros((n_frames - 1) * hop + n_win)
    sq = window ** 2
    for k in range(n_frames):
        env[k * hop:k * hop + n_win] += sq
    return env


def istft(s: ComplexSpectrogram) -> Waveform:
    """Weighted overlap-add inverse of :func:`stft`."""
    cfg, sr = s.config, s.sample_rate
    n_win = cfg.window_samples(sr)
    hop = cfg.hop_samples(sr)
    n_frames = s.bins.shape[1]
    if s.bins.shape[0] != n_win // 2 + 1:
        raise ValueError(f"spectrogram has {s.bins.shape[0]} bins, expected {n_win // 2 + 1}")
    window = cfg.window(sr)
    frames = np.fft.irfft(s.bins.T, n=n_win, axis=1) * window
    out = np.zeros((n_frames - 1) * hop + n_win)
    for k in range(n_frames):
        out[k * hop:k * hop + n_win] += frames[k]
    env = _ola_envelope(window, hop, n_frames)
    offset = n_win // 2 if cfg.center else 0
    out = out[offset:offset + s.length]
    env = env[offset:offset + s.length]
    if env.shape[0] < s.length or np.min(env) < 1e-8 * np.max(window ** 2):
        raise ValueError(
            f"window {cfg.window_kind!r} with hop {hop} samples does not satisfy overlap-add reconstruction"
        )
    return Waveform(out / env, sr)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular mel filterbank and its flat-preserving back-projection.

    Filter centres are spaced evenly on the mel axis from 0 Hz to Nyquist and
    each triangle falls to zero at its neighbours' centres, so every linear bin
    in [0, Nyquist] is covered by at least one filter.
    """

    freqs: np.ndarray
    n_mels: int = 30
    weights: np.ndarray = field(init=False, repr=False)
    back_projection: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        if self.n_mels < 2:
            raise ValueError("need at least two mel filters")
        centres = mel_to_hz(np.linspace(0.0, hz_to_mel(freqs[-1]), self.n_mels))
        weights = np.zeros((self.n_mels, freqs.shape[0]))
        for m in range(self.n_mels):
            c = centres[m]
            if m > 0:
                lo = centres[m - 1]
                rising = (freqs >= lo) & (freqs <= c)
                weights[m, rising] = (freqs[rising] - lo) / (c - lo)
            if m < self.n_mels - 1:
                hi = centres[m + 1]
                falling = (freqs >= c) & (freqs <= hi)
                weights[m, falling] = (hi - freqs[falling]) / (hi - c)
            weights[m, freqs == c] = 1.0
        band_sums = weights.sum(axis=1)
        back = weights.T.copy()
        back /= (back @ band_sums)[:, None]
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "back_projection", back)

    @classmethod
    def for_spectrogram(cls, spec: ComplexSpectrogram, n_mels: int = 30) -> "MelFilterbank":
        return cls(spec.freq_axis, n_mels)


def mel_smooth(mag: np.ndarray, fb: MelFilterbank) -> np.ndarray:
    mag = np.asarray(mag, dtype=np.float64)
    if mag.ndim != 2 or mag.shape[0] != fb.weights.shape[1]:
        raise ValueError(f"magnitude shape {mag.shape} does not match filterbank with {fb.weights.shape[1]} bins")
    if np.any(mag < 0):
        raise ValueError("mel_smooth expects non-negative magnitudes")
    return fb.back_projection @ (fb.weights @ mag)


def magnitude_to_db(a, floor_db: float = DB_FLOOR):
    a = np.asarray(a, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = 20.0 * np.log10(a)
    return np.maximum(out, floor_db)


def db_to_magnitude(x_db):
    return 10.0 ** (0.05 * np.asarray(x_db, dtype=np.float64))


def rms(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.mean(x ** 2))) if x.size else 0.0


def snr_db(signal: np.ndarray, noise: np.ndarray) -> float:
    return 20.0 * np.log10(rms(signal) / rms(noise))


def white_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(n)


def add_masked_noise(
    clean: Waveform,
    gain: np.ndarray,
    rng: np.random.Generator,
    snr_db: float,
    cfg: StftConfig = StftConfig(),
) -> Waveform:
    """Add white noise shaped by a time-frequency ``gain`` to ``clean``.

    Before shaping, the noise is scaled so that a gain of 1 everywhere gives an
    SNR of ``snr_db`` against ``clean``.
    """
    spec = stft(clean, cfg)
    gain = np.asarray(gain, dtype=np.float64)
    if gain.shape != spec.shape:
        raise ValueError(f"noise gain shape {gain.shape} does not match spectrogram shape {spec.shape}")
    noise = white_noise(len(clean), rng)
    level = rms(clean.samples)
    if level == 0:
        raise ValueError("cannot calibrate noise against a silent utterance")
    noise *= level * 10.0 ** (-snr_db / 20.0) / rms(noise)
    noise_spec = stft(Waveform(noise, clean.sample_rate), cfg)
    shaped = istft(noise_spec.with_bins(gain * noise_spec.bins))
    return Waveform(clean.samples + shaped.samples, clean.sample_rate)
