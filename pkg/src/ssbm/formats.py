"""File formats: F x T map container, WAV, CTM alignments, lexicon, corpus manifest, JSON lines.

Map container layout (little-endian)::

    8 bytes   magic  b"SSBMFXT1"
    uint32    rows (F)
    uint32    cols (T)
    64 bytes  config hash, ASCII, NUL-padded
    rows*cols float32, row-major
"""
from __future__ import annotations

import json
import logging
import os
import struct
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .dsp import Waveform
from .importance import WordSpan
from .recog import normalize_text

log = logging.getLogger(__name__)

MAGIC = b"SSBMFXT1"
_HEADER = struct.Struct("<8sII64s")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_map(path, values, config_hash: str = "") -> None:
    values = np.asarray(values, dtype="<f4")
    if values.ndim != 2:
        raise ValueError(f"map must be 2-D, got shape {values.shape}")
    header = _HEADER.pack(MAGIC, values.shape[0], values.shape[1], config_hash.encode("ascii")[:64])
    atomic_write_bytes(path, header + np.ascontiguousarray(values).tobytes())


def read_map(path, expect_hash: str | None = None) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DataError(f"{path}: truncated map header")
    magic, rows, cols, raw_hash = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError(f"{path}: not a map container (bad magic {magic!r})")
    body = data[_HEADER.size:]
    if len(body) != rows * cols * 4:
        raise DataError(f"{path}: expected {rows}x{cols} float32 values, found {len(body)} bytes")
    stored = raw_hash.rstrip(b"\0").decode("ascii")
    if expect_hash is not None and stored != expect_hash:
        raise DataError(f"{path}: written under config {stored[:12]}, current config is {expect_hash[:12]}")
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).astype(np.float64)


def read_map_hash(path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    return _HEADER.unpack(head)[3].rstrip(b"\0").decode("ascii")


def read_wav(path, sample_rate: int = 16000) -> Waveform:
    try:
        sr, data = wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read WAV {path}: {exc}") from exc
    if data.ndim != 1:
        raise DataError(f"{path}: expected mono audio, found {data.shape[1]} channels")
    if data.dtype != np.int16:
        raise DataError(f"{path}: expected 16-bit PCM, found {data.dtype}")
    x = data.astype(np.float64) / 32768.0
    if sr != sample_rate:
        log.warning("%s: resampling from %d Hz to %d Hz", path, sr, sample_rate)
        g = gcd(sr, sample_rate)
        x = resample_poly(x, sample_rate // g, sr // g)
    return Waveform(x, sample_rate)


def write_wav(path, w: Waveform) -> float:
    """Write 16-bit PCM, scaling down to avoid clipping. Returns the applied gain."""
    x = w.samples
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    gain = 1.0 if peak <= 0.999 else 0.999 / peak
    pcm = np.round(x * gain * 32767.0).astype("<i2")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    wavfile.write(tmp, w.sample_rate, pcm)
    os.replace(tmp, path)
    return gain


def read_ctm(path) -> dict:
    """Map utterance id -> [(start_s, duration_s, word), ...] in file order."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith(";;"):
                continue
            parts = line.split()
            if len(parts) < 5:
                raise DataError(f"{path}:{lineno}: CTM line needs 'utt channel start duration word'")
            utt, _channel, start, dur, word = parts[:5]
            try:
                start_s, dur_s = float(start), float(dur)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric start/duration") from None
            if start_s < 0 or dur_s < 0:
                raise DataError(f"{path}:{lineno}: negative start or duration")
            out.setdefault(utt, []).append((start_s, dur_s, word))
    return out


def write_ctm(path, utterance_id: str, entries) -> None:
    lines = [f"{utterance_id} 1 {start:.3f} {dur:.3f} {word}\n" for start, dur, word in entries]
    atomic_write_text(path, "".join(lines))


def read_lexicon(path) -> dict:
    lex = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise DataError(f"{path}:{lineno}: lexicon entry {parts[0]!r} has no phonemes")
            lex.setdefault(parts[0].lower(), parts[1:])
    return lex


def spans_from_alignment(entries, words, n_frames: int, hop_s: float, lexicon=None, utterance_id: str = "") -> list:
    aligned = [normalize_text(w) for _, _, w in entries]
    aligned = [a[0] if a else "" for a in aligned]
    if aligned != list(words):
        raise DataError(
            f"utterance {utterance_id!r}: alignment words {aligned} do not match transcript {list(words)}"
        )
    spans = []
    for k, ((start, dur, _), word) in enumerate(zip(entries, words)):
        s = min(int(round(start / hop_s)), n_frames)
        e = min(max(int(round((start + dur) / hop_s)), s), n_frames)
        phones = lexicon.get(word) if lexicon else None
        spans.append(WordSpan(f"{utterance_id}:{k}", word, s, e, len(phones) if phones else None))
    return spans


@dataclass(frozen=True)
class CorpusEntry:
    utterance_id: str
    wav: Path
    transcript: str
    ctm: Path
    lexicon: Path | None = None
    planted: tuple = ()


def read_corpus(path) -> list:
    path = Path(path)
    base = path.parent
    entries, seen = [], set()
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read corpus manifest {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{where}: invalid JSON ({exc})") from None
        for key in ("id", "wav", "transcript", "ctm"):
            if key not in row:
                raise DataError(f"{where}: entry lacks {key!r}")
        uid = str(row["id"])
        if uid in seen:
            raise DataError(f"{where}: duplicate utterance id {uid!r}")
        seen.add(uid)
        if not normalize_text(row["transcript"]):
            raise DataError(f"{where}: entry {uid!r} has an empty transcript")

        def resolve(p, key):
            full = (base / p) if not Path(p).is_absolute() else Path(p)
            if not full.exists():
                raise DataError(f"{where}: entry {uid!r} {key} file {full} does not exist")
            return full

        entries.append(CorpusEntry(
            uid,
            resolve(row["wav"], "wav"),
            row["transcript"],
            resolve(row["ctm"], "ctm"),
            resolve(row["lexicon"], "lexicon") if row.get("lexicon") else None,
            tuple(resolve(p, "planted") for p in row.get("planted", [])),
        ))
    if not entries:
        raise DataError(f"{path}: corpus manifest is empty")
    return entries


def write_jsonl(path, rows) -> None:
    atomic_write_text(path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def read_jsonl(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: invalid JSON ({exc})") from None
    return out
