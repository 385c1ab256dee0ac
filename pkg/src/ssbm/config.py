"""Experiment configuration: nested dataclasses serialized as JSON.

Unknown keys are rejected so a typo cannot silently fall back to a default.
The canonical JSON form (sorted keys, no whitespace) is hashed into every
output the pipeline writes.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bubble_noise import BubbleFieldConfig
from .dsp import StftConfig


class ConfigError(ValueError):
    pass


def default_bubble_grid() -> list:
    return [float(v) for v in np.logspace(-8, 0, 25)]


def default_energy_grid() -> list:
    return [float(v) for v in np.arange(-80, 21, 5)]


@dataclass(frozen=True)
class MaskSettings:
    alpha: float = 0.5
    d0: float = -80.0
    d1: float = 0.0
    bubble_grid: tuple = field(default_factory=lambda: tuple(default_bubble_grid()))
    energy_grid_db: tuple = field(default_factory=lambda: tuple(default_energy_grid()))
    noise_level_db: float | None = None
    n_noise_seeds: int = 1


@dataclass(frozen=True)
class EnergySettings:
    n_mels: int = 30
    pre_emphasis: float = 0.97


@dataclass(frozen=True)
class RecognizerSettings:
    """``kind`` is "oracle" or "external"; ``command`` takes {job} and {out} placeholders."""

    kind: str = "oracle"
    reveal_threshold: float = 0.6
    command: str = ""
    serial: bool = False
    timeout_s: float | None = None
    normalize_text: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    n_mixtures: int = 1000
    stft: StftConfig = field(default_factory=StftConfig)
    bubble: BubbleFieldConfig = field(default_factory=BubbleFieldConfig)
    mask: MaskSettings = field(default_factory=MaskSettings)
    energy: EnergySettings = field(default_factory=EnergySettings)
    recognizer: RecognizerSettings = field(default_factory=RecognizerSettings)
    continuous_energy: bool = False
    write_audio: str = "auto"
    require_clean_correct: bool = False

    def __post_init__(self):
        if self.n_mixtures < 3:
            raise ConfigError("n_mixtures must be at least 3")
        if self.recognizer.kind not in ("oracle", "external"):
            raise ConfigError(f"unknown recognizer kind {self.recognizer.kind!r}")
        if self.recognizer.kind == "external" and not self.recognizer.command:
            raise ConfigError("external recognizer needs a command")
        if self.write_audio not in ("auto", "none", "all"):
            raise ConfigError(f"write_audio must be auto, none or all, got {self.write_audio!r}")
        for name in ("bubble_grid", "energy_grid_db"):
            grid = list(getattr(self.mask, name))
            if not grid:
                raise ConfigError(f"{name} is empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        if any(not 0 < t <= 1 for t in self.mask.bubble_grid):
            raise ConfigError("bubble_grid values must lie in (0, 1]")
        if self.mask.n_noise_seeds < 1:
            raise ConfigError("n_noise_seeds must be at least 1")

    @property
    def noise_level_db(self) -> float:
        m = self.mask.noise_level_db
        return self.bubble.global_snr_db if m is None else m

    @property
    def writes_audio(self) -> bool:
        if self.write_audio == "auto":
            return self.recognizer.kind == "external"
        return self.write_audio == "all"

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


_SECTIONS = {
    "stft": StftConfig,
    "bubble": BubbleFieldConfig,
    "mask": MaskSettings,
    "energy": EnergySettings,
    "recognizer": RecognizerSettings,
}


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS and cls is ExperimentConfig:
            value = _build(_SECTIONS[key], value, f"{where}.{key}")
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    return _build(ExperimentConfig, data, "config")


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
