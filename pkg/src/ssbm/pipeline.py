"""Staged experiment pipeline: probe -> importance -> evaluate -> report.

Layout under the output directory::

    run.json                 config + run hash (refuses reuse under another hash)
    probe/<utt>/             intelligibility.tsv, mixtures.jsonl, [wav/]
    importance/<utt>/        bubble_<k>_r.fxt, bubble_<k>_p.fxt, energy.fxt
    evaluate/<utt>/          records.jsonl, [wav/]
    evaluate/records.jsonl   all records, utterance order
    report/                  ssbm_sweep.csv, accuracy_curve.csv, phoneme_trend.csv, summary.json

Every stage writes ``stage.json`` when it completes; a completed stage under
the same run hash is skipped. Work within a stage is per utterance and each
utterance leaves a ``done`` marker, which ``resume=True`` honours.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formats
from .bubble_noise import generate_bubble_field, mixture_seed, render_bubble_mixture
from .config import ExperimentConfig
from .dsp import Waveform, stft
from .formats import DataError
from .importance import (
    ImportanceMap,
    IntelligibilityTable,
    importance_from_accumulator,
    smoothed_energy,
)
from .masks import BUBBLE, ENERGY, LERF, MORF, MaskConfig, make_mask, render_masked_mixture
from .metrics import (
    EvalRecord,
    accuracy_by_energy_bin,
    energy_drop_fraction,
    phoneme_stats,
    phoneme_trend,
    sweep_thresholds,
)
from .recog import (
    AdapterConfig,
    RecognizerError,
    OracleConfig,
    oracle_recognize,
    run_external_batch,
    score_words,
    unnoised_from_audibility,
    unnoised_from_gain,
)
from .stats import CorrelationAccumulator

log = logging.getLogger(__name__)

STAGES = ("probe", "importance", "evaluate", "report")


@dataclass
class Utterance:
    utterance_id: str
    waveform: Waveform
    words: list
    spans: list
    planted: list | None = None


def _words(entry) -> list:
    from .recog import normalize_text

    return normalize_text(entry.transcript)


def load_utterance(entry: formats.CorpusEntry, cfg: ExperimentConfig) -> Utterance:
    sr = 16000
    w = formats.read_wav(entry.wav, sr)
    if len(w) == 0 or not np.any(w.samples):
        raise DataError(f"utterance {entry.utterance_id!r}: silent or empty audio")
    words = _words(entry)
    ctm = formats.read_ctm(entry.ctm)
    if entry.utterance_id not in ctm:
        raise DataError(f"utterance {entry.utterance_id!r}: no alignment in {entry.ctm}")
    lexicon = formats.read_lexicon(entry.lexicon) if entry.lexicon else None
    n_frames = cfg.stft.n_frames(len(w), sr)
    hop_s = cfg.stft.hop_samples(sr) / sr
    spans = formats.spans_from_alignment(ctm[entry.utterance_id], words, n_frames, hop_s, lexicon, entry.utterance_id)
    planted = None
    if entry.planted:
        if len(entry.planted) != len(words):
            raise DataError(f"utterance {entry.utterance_id!r}: {len(entry.planted)} planted maps for {len(words)} words")
        planted = [formats.read_map(p) > 0.5 for p in entry.planted]
        shape = (cfg.stft.n_bins(sr), n_frames)
        for p, m in zip(entry.planted, planted):
            if m.shape != shape:
                raise DataError(f"{p}: planted map shape {m.shape} does not match the STFT grid {shape}")
    return Utterance(entry.utterance_id, w, words, spans, planted)


def run_hash(cfg: ExperimentConfig, corpus_path) -> str:
    """Hash of the config and of the corpus manifest plus every file it references."""
    h = hashlib.sha256(cfg.canonical_json().encode("utf-8"))
    corpus_path = Path(corpus_path)
    h.update(corpus_path.read_bytes())
    for entry in formats.read_corpus(corpus_path):
        for p in (entry.wav, entry.ctm, entry.lexicon, *entry.planted):
            if p is not None:
                h.update(hashlib.sha256(Path(p).read_bytes()).digest())
    return h.hexdigest()


def _oracle(utt: Utterance, cfg: ExperimentConfig) -> OracleConfig:
    if utt.planted is None:
        raise DataError(f"utterance {utt.utterance_id!r}: the oracle recognizer needs planted maps")
    try:
        return OracleConfig(utt.planted, reveal_threshold=cfg.recognizer.reveal_threshold)
    except ValueError as exc:
        raise DataError(f"utterance {utt.utterance_id!r}: {exc}") from exc


def _adapter(cfg: ExperimentConfig) -> AdapterConfig:
    r = cfg.recognizer
    return AdapterConfig(r.command, r.serial, r.timeout_s)


def _score_external(utt, items, workdir, cfg) -> list:
    hyps = run_external_batch(items, _adapter(cfg), workdir)
    return [score_words(utt.words, h.hypothesis, cfg.recognizer.normalize_text) for h in hyps]


# ---------------------------------------------------------------- probe


def clean_scores(utt: Utterance, cfg: ExperimentConfig, out_dir: Path) -> list:
    """Per-word correctness on the clean utterance (the optional ingestion filter)."""
    if cfg.recognizer.kind == "oracle":
        oracle = _oracle(utt, cfg)
        power = stft(utt.waveform, cfg.stft).power()
        return oracle_recognize(np.ones(power.shape, dtype=bool), power, oracle)
    wav = Path(out_dir) / "clean.wav"
    formats.write_wav(wav, utt.waveform)
    return _score_external(utt, [(f"{utt.utterance_id}-clean", str(wav))], Path(out_dir) / "asr-clean", cfg)[0]


def probe_utterance(utt: Utterance, cfg: ExperimentConfig, out_dir: Path, run_id: str) -> IntelligibilityTable:
    out_dir = Path(out_dir)
    spec = stft(utt.waveform, cfg.stft)
    power = spec.power()
    duration = utt.waveform.duration
    rows, scores = [], []
    oracle = _oracle(utt, cfg) if cfg.recognizer.kind == "oracle" else None
    items = []
    for j in range(cfg.n_mixtures):
        mixture_id = f"{utt.utterance_id}-m{j:05d}"
        seed = mixture_seed(cfg.seed, utt.utterance_id, j)
        field = generate_bubble_field(seed, cfg.bubble, spec.shape, duration, mixture_id, stft_cfg=cfg.stft)
        row = {"utterance_id": utt.utterance_id, "mixture_id": mixture_id, "seed": seed,
               "n_bubbles": field.n_bubbles, "config_hash": run_id, "wav_path": None, "gain": 1.0}
        if cfg.writes_audio:
            mix = render_bubble_mixture(utt.waveform, field, cfg.bubble, cfg.stft)
            wav = out_dir / "wav" / f"{mixture_id}.wav"
            row["gain"] = formats.write_wav(wav, mix)
            row["wav_path"] = str(wav.relative_to(out_dir))  # relative, so output trees compare byte-for-byte
            items.append((mixture_id, str(wav)))
        if oracle is not None:
            scores.append(oracle_recognize(unnoised_from_audibility(field.values, oracle), power, oracle))
        rows.append(row)
    if oracle is None:
        scores = _score_external(utt, items, out_dir / "asr", cfg)
    table = IntelligibilityTable(np.asarray(scores).reshape(len(rows), len(utt.words)), tuple(utt.words))
    formats.write_jsonl(out_dir / "mixtures.jsonl", rows)
    write_table(out_dir / "intelligibility.tsv", table, [r["mixture_id"] for r in rows], run_id)
    return table


def write_table(path, table: IntelligibilityTable, mixture_ids, run_id: str) -> None:
    buf = io.StringIO()
    buf.write(f"# config_hash={run_id}\n")
    buf.write("mixture_id\t" + "\t".join(table.words) + "\n")
    for mid, row in zip(mixture_ids, table.values):
        buf.write(mid + "\t" + "\t".join(str(int(v)) for v in row) + "\n")
    formats.atomic_write_text(path, buf.getvalue())


def read_table(path, expect_hash: str | None = None):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# config_hash="):
        raise DataError(f"{path}: missing config hash header")
    stored = lines[0].split("=", 1)[1]
    if expect_hash is not None and stored != expect_hash:
        raise DataError(f"{path}: written under config {stored[:12]}, current config is {expect_hash[:12]}")
    words = tuple(lines[1].split("\t")[1:])
    ids, values = [], []
    for line in lines[2:]:
        parts = line.split("\t")
        ids.append(parts[0])
        values.append([int(v) for v in parts[1:]])
    return ids, IntelligibilityTable(np.asarray(values, dtype=np.int8).reshape(len(ids), len(words)), words)


# ---------------------------------------------------------------- importance


def importance_utterance(utt: Utterance, cfg: ExperimentConfig, probe_dir: Path, out_dir: Path, run_id: str) -> list:
    rows = formats.read_jsonl(Path(probe_dir) / "mixtures.jsonl")
    _, table = read_table(Path(probe_dir) / "intelligibility.tsv", run_id)
    for r in rows:
        if r["config_hash"] != run_id:
            raise DataError(f"{probe_dir}: mixture {r['mixture_id']} belongs to another config")
    spec = stft(utt.waveform, cfg.stft)
    duration = utt.waveform.duration
    acc = CorrelationAccumulator(spec.shape, len(utt.words))
    for j, r in enumerate(rows):
        field = generate_bubble_field(r["seed"], cfg.bubble, spec.shape, duration, r["mixture_id"], stft_cfg=cfg.stft)
        acc.update(field.values, table.values[j])
    maps = []
    for k in range(len(utt.words)):
        m = importance_from_accumulator(acc, k, f"{utt.utterance_id}:{k}")
        formats.write_map(out_dir / f"bubble_{k}_r.fxt", m.r, run_id)
        formats.write_map(out_dir / f"bubble_{k}_p.fxt", m.p, run_id)
        maps.append(m)
    energy = smoothed_energy(utt.waveform, cfg.stft, cfg.energy.n_mels, cfg.energy.pre_emphasis)
    formats.write_map(out_dir / "energy.fxt", energy, run_id)
    return maps


def load_importance(utt: Utterance, imp_dir: Path, run_id: str):
    imp_dir = Path(imp_dir)
    maps = []
    for k in range(len(utt.words)):
        r = formats.read_map(imp_dir / f"bubble_{k}_r.fxt", run_id)
        p = formats.read_map(imp_dir / f"bubble_{k}_p.fxt", run_id)
        maps.append(ImportanceMap(r, p, f"{utt.utterance_id}:{k}"))
    energy = formats.read_map(imp_dir / "energy.fxt", run_id)
    return maps, energy


# ---------------------------------------------------------------- evaluate


def _mask_configs(cfg: ExperimentConfig):
    m = cfg.mask
    for t in m.bubble_grid:
        yield BUBBLE, float(t), MaskConfig(float(t), m.alpha, m.d0, m.d1, LERF, BUBBLE)
    for t_db in m.energy_grid_db:
        yield ENERGY, float(t_db), MaskConfig.energy(float(t_db), alpha=m.alpha, d0=m.d0, d1=m.d1)


def evaluate_utterance(utt: Utterance, maps, energy, cfg: ExperimentConfig, out_dir: Path, run_id: str) -> list:
    from dataclasses import replace

    out_dir = Path(out_dir)
    spec = stft(utt.waveform, cfg.stft)
    power = spec.power()
    oracle = _oracle(utt, cfg) if cfg.recognizer.kind == "oracle" else None
    n_seeds = cfg.mask.n_noise_seeds
    cells, items, scores = [], [], {}
    for k, span in enumerate(utt.spans):
        p_map = maps[k].p
        for method, thr, mcfg in _mask_configs(cfg):
            field = p_map if method == BUBBLE else energy
            bounds = None if method == BUBBLE else (span.start_frame, span.end_frame)
            cell = {"k": k, "method": method, "threshold": thr}
            for variant in (LERF, MORF):
                mask = make_mask(field, replace(mcfg, variant=variant), bounds)
                cell["e_" + variant] = energy_drop_fraction(power, mask.values, mcfg.cut, cfg.continuous_energy)
                keys = []
                for s in range(n_seeds):
                    key = f"{utt.utterance_id}-w{k}-{method}-{thr:.6g}-{variant}-s{s}"
                    keys.append(key)
                    if oracle is not None and s == 0:
                        scores[key] = oracle_recognize(unnoised_from_gain(mask.values, oracle), power, oracle)
                    elif oracle is not None:
                        scores[key] = scores[keys[0]]
                    if cfg.writes_audio:
                        seed = mixture_seed(cfg.seed, key, 0)
                        mix = render_masked_mixture(utt.waveform, mask, seed, cfg.noise_level_db, cfg.stft)
                        wav = out_dir / "wav" / f"{key}.wav"
                        formats.write_wav(wav, mix)
                        items.append((key, str(wav)))
                cell["keys_" + variant] = keys
            cells.append(cell)
    if oracle is None:
        ext = _score_external(utt, items, out_dir / "asr", cfg)
        scores = {key: s for (key, _), s in zip(items, ext)}
    records = []
    n_words = len(utt.words)
    for cell in cells:
        k = cell["k"]
        acc = {}
        for variant in (LERF, MORF):
            runs = np.asarray([scores[key] for key in cell["keys_" + variant]], dtype=np.float64)
            a_w = float(runs[:, k].mean())
            others = [i for i in range(n_words) if i != k]
            a_o = float(runs[:, others].mean()) if others else math.nan
            acc[variant] = (a_w, a_o)
        span = utt.spans[k]
        records.append(EvalRecord(
            utt.utterance_id, k, utt.words[k], cell["method"], cell["threshold"],
            acc[LERF][0], acc[LERF][1], cell["e_lerf"],
            acc[MORF][0], acc[MORF][1], cell["e_morf"],
            span.phoneme_count,
        ))
    formats.write_jsonl(out_dir / "records.jsonl", [record_to_dict(r, run_id) for r in records])
    return records


def record_to_dict(rec: EvalRecord, run_id: str) -> dict:
    d = {f: getattr(rec, f) for f in rec.__dataclass_fields__}
    d = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}
    d["config_hash"] = run_id
    return d


def record_from_dict(d: dict, expect_hash: str | None = None) -> EvalRecord:
    if expect_hash is not None and d.get("config_hash") != expect_hash:
        raise DataError("evaluation record belongs to another config")
    kw = {f: d[f] for f in EvalRecord.__dataclass_fields__}
    for f in ("a_w_lerf", "a_o_lerf", "e_lerf", "a_w_morf", "a_o_morf", "e_morf", "threshold"):
        kw[f] = math.nan if kw[f] is None else float(kw[f])
    return EvalRecord(**kw)


# ---------------------------------------------------------------- report


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def accuracy_curves(records) -> dict:
    """(method, variant) -> AccuracyCurve of target-word accuracy by obscured energy."""
    out = {}
    for method in sorted({r.method for r in records}):
        recs = [r for r in records if r.method == method]
        out[(method, LERF)] = accuracy_by_energy_bin([r.e_lerf for r in recs], [r.a_w_lerf for r in recs])
        out[(method, MORF)] = accuracy_by_energy_bin([r.e_morf for r in recs], [r.a_w_morf for r in recs])
    return out


def build_report(records, out_dir: Path, run_id: str) -> dict:
    out_dir = Path(out_dir)
    sweep = sweep_thresholds(records)
    formats.atomic_write_text(out_dir / "ssbm_sweep.csv", _csv(
        [(r.method, r.threshold, r.mean_delta_lerf, r.mean_delta_morf, r.ssbm, r.n_lerf, r.n_morf,
          r.excluded_lerf, r.excluded_morf, run_id) for r in sweep.rows],
        ["method", "threshold", "mean_delta_lerf", "mean_delta_morf", "ssbm", "n_lerf", "n_morf",
         "excluded_lerf", "excluded_morf", "config_hash"]))
    curves = accuracy_curves(records)
    formats.atomic_write_text(out_dir / "accuracy_curve.csv", _csv(
        [(m, v, pct, acc, n, run_id) for (m, v), c in sorted(curves.items()) for pct, (acc, n) in sorted(c.bins.items())],
        ["method", "variant", "obscured_percent", "accuracy", "count", "config_hash"]))
    trend = phoneme_trend(phoneme_stats(records, BUBBLE))
    formats.atomic_write_text(out_dir / "phoneme_trend.csv", _csv(
        [(t.phoneme_count, t.variant, t.mean_threshold, t.mean_log10_threshold, t.count, run_id) for t in trend.rows],
        ["phoneme_count", "variant", "mean_threshold", "mean_log10_threshold", "count", "config_hash"]))
    summary = {"config_hash": run_id, "methods": {}, "phoneme_trend": {
        "status": "no data" if trend.empty else "ok", "excluded": trend.excluded}}
    for method in sweep.methods:
        thr, best = sweep.best(method)
        summary["methods"][method] = {"best_threshold": thr, "best_ssbm": None if math.isnan(best) else best}
    formats.atomic_write_text(out_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# ---------------------------------------------------------------- stage driver


class Experiment:
    def __init__(self, cfg: ExperimentConfig, corpus_path, out_dir, workers: int = 1, resume: bool = False):
        self.cfg = cfg
        self.corpus_path = Path(corpus_path)
        self.out = Path(out_dir)
        self.workers = max(1, int(workers))
        self.resume = resume
        self.entries = formats.read_corpus(self.corpus_path)
        self.run_id = run_hash(cfg, self.corpus_path)
        self._claim()

    def _claim(self):
        self.out.mkdir(parents=True, exist_ok=True)
        run_file = self.out / "run.json"
        if run_file.exists():
            stored = json.loads(run_file.read_text(encoding="utf-8")).get("config_hash")
            if stored != self.run_id:
                raise DataError(
                    f"{self.out} holds outputs of config {str(stored)[:12]}; refusing to mix them with {self.run_id[:12]}"
                )
            return
        payload = {"config_hash": self.run_id, "corpus": str(self.corpus_path), "config": self.cfg.to_dict()}
        formats.atomic_write_text(run_file, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def stage_dir(self, name: str) -> Path:
        return self.out / name

    def stage_complete(self, name: str) -> bool:
        meta = self.stage_dir(name) / "stage.json"
        if not meta.exists():
            return False
        data = json.loads(meta.read_text(encoding="utf-8"))
        if data.get("config_hash") != self.run_id:
            raise DataError(f"{meta}: stage written under another config")
        return bool(data.get("complete"))

    def _begin(self, name: str) -> bool:
        if self.stage_complete(name):
            log.info("stage %s already complete for config %s; skipping", name, self.run_id[:12])
            return False
        d = self.stage_dir(name)
        if d.exists() and not self.resume:
            shutil.rmtree(d)
        d.mkdir(parents=True, exist_ok=True)
        return True

    def _finish(self, name: str, extra=None):
        payload = {"config_hash": self.run_id, "complete": True, "stage": name}
        payload.update(extra or {})
        formats.atomic_write_text(self.stage_dir(name) / "stage.json", json.dumps(payload, sort_keys=True) + "\n")

    def _require(self, name: str):
        if not self.stage_complete(name):
            raise DataError(f"stage {name!r} has not been run for this config in {self.out}")

    def _map(self, fn, args_list):
        todo = []
        for args in args_list:
            done = Path(args[-1]) / "done"
            if self.resume and done.exists():
                continue
            todo.append(args)
        failed = []
        serial = self.cfg.recognizer.kind == "external" and self.cfg.recognizer.serial
        if self.workers > 1 and len(todo) > 1 and not serial:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [(args, pool.submit(_call, fn, args)) for args in todo]
                for args, fut in futures:
                    try:
                        fut.result()
                    except RecognizerError as exc:
                        failed.append((args[0].utterance_id, exc))
        else:
            for args in todo:
                try:
                    _call(fn, args)
                except RecognizerError as exc:
                    failed.append((args[0].utterance_id, exc))
        # a recognizer failure aborts only its utterance; the stage stays incomplete
        for uid, exc in failed:
            log.error("utterance %s: %s", uid, exc)
        if failed:
            ids = ", ".join(uid for uid, _ in failed)
            raise RecognizerError(f"recognizer failed for {len(failed)} utterance(s): {ids}; "
                                  f"fix the recognizer and rerun with --resume\nfirst failure: {failed[0][1]}")

    def active(self) -> list:
        """Corpus entries that passed probing (all of them unless the clean-correct filter dropped some)."""
        self._require("probe")
        meta = json.loads((self.stage_dir("probe") / "stage.json").read_text(encoding="utf-8"))
        keep = set(meta["utterances"])
        return [e for e in self.entries if e.utterance_id in keep]

    def probe(self):
        if not self._begin("probe"):
            return
        self._map(_probe_job, [(e, self.cfg, self.run_id, str(self.stage_dir("probe") / e.utterance_id))
                               for e in self.entries])
        kept, dropped = [], []
        for e in self.entries:
            excluded = self.stage_dir("probe") / e.utterance_id / "excluded.json"
            (dropped if excluded.exists() else kept).append(e.utterance_id)
        if dropped:
            log.warning("excluded %d utterance(s) not recognized correctly when clean: %s", len(dropped), ", ".join(dropped))
        if not kept:
            raise DataError("no utterance passed the clean-correct filter")
        self._finish("probe", {"utterances": kept, "excluded": dropped})

    def importance(self):
        self._require("probe")
        if not self._begin("importance"):
            return
        self._map(_importance_job, [(e, self.cfg, self.run_id, str(self.stage_dir("probe") / e.utterance_id),
                                     str(self.stage_dir("importance") / e.utterance_id)) for e in self.active()])
        self._finish("importance")

    def evaluate(self):
        self._require("importance")
        if not self._begin("evaluate"):
            return
        entries = self.active()
        self._map(_evaluate_job, [(e, self.cfg, self.run_id, str(self.stage_dir("importance") / e.utterance_id),
                                   str(self.stage_dir("evaluate") / e.utterance_id)) for e in entries])
        lines = []
        for e in entries:
            lines.append((self.stage_dir("evaluate") / e.utterance_id / "records.jsonl").read_text(encoding="utf-8"))
        formats.atomic_write_text(self.stage_dir("evaluate") / "records.jsonl", "".join(lines))
        self._finish("evaluate")

    def records(self) -> list:
        self._require("evaluate")
        return [record_from_dict(d, self.run_id) for d in formats.read_jsonl(self.stage_dir("evaluate") / "records.jsonl")]

    def report(self):
        recs = self.records()
        if not self._begin("report"):
            return json.loads((self.stage_dir("report") / "summary.json").read_text(encoding="utf-8"))
        summary = build_report(recs, self.stage_dir("report"), self.run_id)
        self._finish("report")
        return summary

    def run_all(self):
        self.probe()
        self.importance()
        self.evaluate()
        return self.report()

    def utterance(self, utterance_id: str) -> Utterance:
        for e in self.entries:
            if e.utterance_id == utterance_id:
                return load_utterance(e, self.cfg)
        raise KeyError(utterance_id)


def _call(fn, args):
    return fn(*args)


def _mark_done(out_dir: Path):
    formats.atomic_write_text(Path(out_dir) / "done", "")


def _probe_job(entry, cfg, run_id, out_dir):
    utt = load_utterance(entry, cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.require_clean_correct:
        scores = clean_scores(utt, cfg, out_dir)
        if not all(scores):
            formats.atomic_write_text(out_dir / "excluded.json",
                                      json.dumps({"config_hash": run_id, "clean_scores": scores}) + "\n")
            _mark_done(out_dir)
            return
    probe_utterance(utt, cfg, out_dir, run_id)
    _mark_done(out_dir)


def _importance_job(entry, cfg, run_id, probe_dir, out_dir):
    utt = load_utterance(entry, cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    importance_utterance(utt, cfg, Path(probe_dir), out_dir, run_id)
    _mark_done(out_dir)


def _evaluate_job(entry, cfg, run_id, imp_dir, out_dir):
    utt = load_utterance(entry, cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    maps, energy = load_importance(utt, Path(imp_dir), run_id)
    evaluate_utterance(utt, maps, energy, cfg, out_dir, run_id)
    _mark_done(out_dir)
