"""Recognizer boundary: word scoring, the external batch protocol, and the oracle recognizer."""
from __future__ import annotations

import logging
import re
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

_PUNCT = re.compile(r"[^\w\s']|(?<!\w)'|'(?!\w)")


class RecognizerError(RuntimeError):
    """The external recognizer failed or produced unusable output."""


@dataclass(frozen=True)
class HypothesisRecord:
    mixture_id: str
    hypothesis: str


def normalize_text(text: str) -> list:
    return _PUNCT.sub(" ", text.lower()).split()


def _words(seq, normalize: bool) -> list:
    if isinstance(seq, str):
        return normalize_text(seq) if normalize else seq.split()
    return [w.lower() for w in seq] if normalize else list(seq)


def score_words(reference, hypothesis, normalize: bool = True) -> list:
    """Per-reference-word correctness (0/1) under a minimum edit-distance alignment.

    Among alignments of minimum edit cost, one with the most exact matches is
    chosen. Remaining ties are settled while walking back from the end,
    preferring a match, then a substitution, a deletion, an insertion; so an
    identical suffix of both sequences always scores as matched.
    """
    ref = _words(reference, normalize)
    hyp = _words(hypothesis, normalize)
    if not ref:
        raise ValueError("reference must contain at least one word")
    return _align(ref, hyp)


def _align(ref, hyp) -> list:
    n, m = len(ref), len(hyp)
    # cost[i][j] = (edits, -matches) for ref[:i] against hyp[:j]
    cost = [[(0, 0)] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = (i, 0)
    for j in range(1, m + 1):
        cost[0][j] = (j, 0)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            e, neg = cost[i - 1][j - 1]
            diag = (e, neg - 1) if ref[i - 1] == hyp[j - 1] else (e + 1, neg)
            up = (cost[i - 1][j][0] + 1, cost[i - 1][j][1])
            left = (cost[i][j - 1][0] + 1, cost[i][j - 1][1])
            cost[i][j] = min(diag, up, left)
    scores = [0] * n
    i, j = n, m
    while i > 0 and j > 0:
        here = cost[i][j]
        e, neg = cost[i - 1][j - 1]
        if ref[i - 1] == hyp[j - 1] and here == (e, neg - 1):
            scores[i - 1] = 1
            i, j = i - 1, j - 1
        elif ref[i - 1] != hyp[j - 1] and here == (e + 1, neg):
            i, j = i - 1, j - 1
        elif here == (cost[i - 1][j][0] + 1, cost[i - 1][j][1]):
            i -= 1
        else:
            j -= 1
    return scores


@dataclass
class OracleConfig:
    """Planted ground-truth regions of one utterance, keyed by reference word position."""

    planted_maps: list
    reveal_threshold: float = 0.6
    mask_cut: float = 10.0 ** (0.05 * -40.0)
    audibility_cut: float = 0.5

    def __post_init__(self):
        if not 0 < self.reveal_threshold < 1:
            raise ValueError(f"reveal_threshold must lie in (0, 1), got {self.reveal_threshold}")
        maps = []
        for k, region in enumerate(self.planted_maps):
            region = np.asarray(region, dtype=bool)
            if not region.any():
                raise ValueError(f"planted region for word {k} is empty")
            maps.append(region)
        self.planted_maps = maps


def revealed_fraction(unnoised: np.ndarray, region: np.ndarray, power: np.ndarray) -> float:
    e = power[region]
    total = e.sum()
    if total <= 0:
        # a silent planted region: fall back to counting points
        return float(unnoised[region].mean())
    return float((unnoised[region] * e).sum() / total)


def oracle_recognize(unnoised: np.ndarray, power: np.ndarray, oracle: OracleConfig) -> list:
    """Word k is correct iff at least ``reveal_threshold`` of its planted-region energy is unnoised.

    ``unnoised`` is a boolean F x T map; :func:`unnoised_from_gain` and
    :func:`unnoised_from_audibility` build it from masks and bubble fields.
    """
    unnoised = np.asarray(unnoised, dtype=bool)
    if unnoised.shape != power.shape:
        raise ValueError(f"field shape {unnoised.shape} does not match spectrogram {power.shape}")
    out = []
    for region in oracle.planted_maps:
        if region.shape != power.shape:
            raise ValueError(f"planted region shape {region.shape} does not match spectrogram {power.shape}")
        out.append(int(revealed_fraction(unnoised, region, power) >= oracle.reveal_threshold))
    return out


def unnoised_from_gain(gain: np.ndarray, oracle: OracleConfig) -> np.ndarray:
    return np.asarray(gain) < oracle.mask_cut


def unnoised_from_audibility(audibility: np.ndarray, oracle: OracleConfig) -> np.ndarray:
    return np.asarray(audibility) > oracle.audibility_cut


@dataclass(frozen=True)
class AdapterConfig:
    """External recognizer command, e.g. ``"decode.sh {job} {out}"``.

    ``serial`` declares that the command must not be invoked concurrently.
    """

    command: str
    serial: bool = False
    timeout_s: float | None = None


def write_job_file(path, items) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for mixture_id, wav_path in items:
            if "\t" in mixture_id or "\n" in mixture_id:
                raise ValueError(f"mixture id {mixture_id!r} contains a tab or newline")
            fh.write(f"{mixture_id}\t{wav_path}\n")


def read_hypothesis_file(path) -> dict:
    hyps = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if "\t" not in line:
                raise RecognizerError(f"{path}:{lineno}: malformed hypothesis line {line!r} (expected id<TAB>words)")
            mixture_id, text = line.split("\t", 1)
            if not mixture_id:
                raise RecognizerError(f"{path}:{lineno}: empty mixture id")
            hyps[mixture_id] = text.strip()
    return hyps


def run_external_batch(items, adapter: AdapterConfig, workdir) -> list:
    """Run the external recognizer over ``items`` = [(mixture_id, wav_path), ...]."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    job = workdir / "job.tsv"
    out = workdir / "hyp.tsv"
    items = list(items)
    write_job_file(job, items)
    if out.exists():
        out.unlink()
    cmd = shlex.split(adapter.command.format(job=shlex.quote(str(job)), out=shlex.quote(str(out))))
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=adapter.timeout_s)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise RecognizerError(f"could not run recognizer {cmd!r}: {exc}") from exc
    if proc.returncode != 0:
        raise RecognizerError(
            f"recognizer {cmd!r} exited with status {proc.returncode}\nstdout:\n{proc.stdout}\nstderr:\n{proc.stderr}"
        )
    if not out.exists():
        raise RecognizerError(f"recognizer {cmd!r} did not write {out}")
    hyps = read_hypothesis_file(out)
    records = []
    missing = 0
    for mixture_id, _ in items:
        if mixture_id not in hyps:
            missing += 1
        records.append(HypothesisRecord(mixture_id, hyps.get(mixture_id, "")))
    if missing:
        log.warning("recognizer returned no hypothesis for %d of %d mixtures; scored as empty", missing, len(items))
    return records
