"""Synthetic corpus with planted importance regions.

Each "word" is a loud low-frequency harmonic complex that spans the whole word
(the distractor) plus a quieter band-limited noise burst (the cue). The cue's
time-frequency rectangle is the word's planted region: the only part of the
word the oracle recognizer listens to. The energy baseline cannot tell cue
from distractor, while the bubble analysis can.

Words alternate between a small region and one ``large_scale`` times larger
on both axes. Their lexicon entries carry 2 and 8 phonemes, so region size
appears as word length in the phoneme analysis.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import StftConfig, Waveform, hz_to_mel, mel_to_hz

_SYLLABLES = ["ka", "to", "mi", "re", "su", "no", "ha", "li", "po", "da", "ne", "gu"]


@dataclass(frozen=True)
class SyntheticCorpusConfig:
    n_utterances: int = 10
    words_per_utterance: int = 3
    sample_rate: int = 16000
    word_s: float = 0.6
    gap_s: float = 0.15
    edge_s: float = 0.25
    small_frames: int = 12
    small_mel: float = 300.0
    large_scale: float = 2.0
    cue_band_hz: tuple = (1000.0, 6500.0)
    distractor_db: float = 0.0
    cue_db: float = -8.0
    seed: int = 1234


@dataclass
class SyntheticWord:
    text: str
    phonemes: list
    start_s: float
    end_s: float
    region: np.ndarray
    large: bool


@dataclass
class SyntheticUtterance:
    utterance_id: str
    waveform: Waveform
    words: list

    @property
    def transcript(self) -> str:
        return " ".join(w.text for w in self.words)


def _word_text(k: int, n_syllables: int, rng) -> str:
    picks = rng.choice(len(_SYLLABLES), size=n_syllables)
    return "".join(_SYLLABLES[i] for i in picks)


def _ramp(n: int, n_ramp: int) -> np.ndarray:
    env = np.ones(n)
    n_ramp = min(n_ramp, n // 2)
    if n_ramp:
        r = 0.5 - 0.5 * np.cos(np.pi * np.arange(n_ramp) / n_ramp)
        env[:n_ramp] = r
        env[n - n_ramp:] = r[::-1]
    return env


def _band_noise(n: int, sr: int, lo: float, hi: float, rng) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / sr)
    spec[(f < lo) | (f > hi)] = 0.0
    x = np.fft.irfft(spec, n)
    return x / np.sqrt(np.mean(x ** 2))


def make_utterance(index: int, cfg: SyntheticCorpusConfig, stft_cfg: StftConfig = StftConfig()) -> SyntheticUtterance:
    sr = cfg.sample_rate
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index]))
    n_words = cfg.words_per_utterance
    duration = 2 * cfg.edge_s + n_words * cfg.word_s + (n_words - 1) * cfg.gap_s
    n = int(round(duration * sr))
    x = np.zeros(n)
    hop_s = stft_cfg.hop_samples(sr) / sr
    n_frames = stft_cfg.n_frames(n, sr)
    n_bins = stft_cfg.n_bins(sr)
    freqs = np.arange(n_bins) * sr / stft_cfg.window_samples(sr)
    mels = hz_to_mel(freqs)
    frame_t = np.arange(n_frames) * hop_s
    texts = set()
    words = []
    for k in range(n_words):
        large = (index + k) % 2 == 1
        scale = cfg.large_scale if large else 1.0
        w0 = cfg.edge_s + k * (cfg.word_s + cfg.gap_s)
        w1 = w0 + cfg.word_s
        i0, i1 = int(round(w0 * sr)), int(round(w1 * sr))
        t = np.arange(i1 - i0) / sr
        f0 = rng.uniform(110.0, 200.0)
        distractor = sum(np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi)) / h
                         for h in range(1, int(900 // f0) + 1))
        distractor *= 10 ** (cfg.distractor_db / 20) * 0.1 / np.sqrt(np.mean(distractor ** 2))
        x[i0:i1] += distractor * _ramp(i1 - i0, int(0.02 * sr))

        cue_frames = int(round(cfg.small_frames * scale))
        cue_mel = cfg.small_mel * scale
        word_frames = np.flatnonzero((frame_t >= w0 + 0.03) & (frame_t <= w1 - 0.03))
        start = int(rng.integers(word_frames[0], word_frames[-1] - cue_frames + 2))
        frames = np.arange(start, start + cue_frames)
        mel_lo_bound, mel_hi_bound = hz_to_mel(cfg.cue_band_hz[0]), hz_to_mel(cfg.cue_band_hz[1])
        m_lo = rng.uniform(mel_lo_bound, mel_hi_bound - cue_mel)
        m_hi = m_lo + cue_mel
        rows = np.flatnonzero((mels >= m_lo) & (mels <= m_hi))
        region = np.zeros((n_bins, n_frames), dtype=bool)
        region[np.ix_(rows, frames)] = True

        # the burst spans the region's frame centres, so its energy sits inside the region
        c0 = int(round((frames[0] - 0.5) * hop_s * sr))
        c1 = int(round((frames[-1] + 0.5) * hop_s * sr))
        burst = _band_noise(c1 - c0, sr, float(mel_to_hz(m_lo)), float(mel_to_hz(m_hi)), rng)
        burst *= 10 ** (cfg.cue_db / 20) * 0.1 * _ramp(c1 - c0, int(0.008 * sr))
        x[c0:c1] += burst

        n_syl = 4 if large else 1
        text = _word_text(k, n_syl, rng)
        while text in texts:
            text = _word_text(k, n_syl, rng)
        texts.add(text)
        words.append(SyntheticWord(text, list(text), w0, w1, region, large))
    peak = np.max(np.abs(x))
    if peak > 0.9:
        x *= 0.9 / peak
    return SyntheticUtterance(f"syn{index:03d}", Waveform(x, sr), words)


def make_corpus(cfg: SyntheticCorpusConfig = SyntheticCorpusConfig(), stft_cfg: StftConfig = StftConfig()) -> list:
    return [make_utterance(i, cfg, stft_cfg) for i in range(cfg.n_utterances)]


def write_corpus(out_dir, cfg: SyntheticCorpusConfig = SyntheticCorpusConfig(), stft_cfg: StftConfig = StftConfig()) -> Path:
    """Write WAVs, CTM alignments, a lexicon, planted maps and ``corpus.jsonl``; return the manifest path."""
    from . import formats

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lexicon = {}
    rows = []
    for utt in make_corpus(cfg, stft_cfg):
        wav = f"{utt.utterance_id}.wav"
        formats.write_wav(out_dir / wav, utt.waveform)
        ctm = f"{utt.utterance_id}.ctm"
        formats.write_ctm(out_dir / ctm, utt.utterance_id, [(w.start_s, w.end_s - w.start_s, w.text) for w in utt.words])
        planted = []
        for k, w in enumerate(utt.words):
            name = f"{utt.utterance_id}_w{k}.fxt"
            formats.write_map(out_dir / name, w.region.astype(np.float32), "planted")
            planted.append(name)
            lexicon[w.text] = w.phonemes
        rows.append({"id": utt.utterance_id, "wav": wav, "transcript": utt.transcript, "ctm": ctm,
                     "lexicon": "lexicon.txt", "planted": planted})
    formats.atomic_write_text(out_dir / "lexicon.txt", "".join(f"{w} {' '.join(p)}\n" for w, p in sorted(lexicon.items())))
    manifest = out_dir / "corpus.jsonl"
    formats.write_jsonl(manifest, rows)
    return manifest
