"""Run configuration: dataclass blocks with validation and JSON round-trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MixtureConfig:
    components: int = 3
    learning_rate: float = 0.05
    match_lambda: float = 2.5
    background_threshold: float = 0.8
    initial_sigma: float = 15.0
    initial_weight: float = 0.05
    variance_floor: float = 4.0

    def __post_init__(self):
        if not 3 <= self.components <= 5:
            raise ConfigError(f"components must be in [3, 5], got {self.components}")
        if not 0.0 < self.learning_rate < 1.0:
            raise ConfigError(f"learning_rate must be in (0, 1), got {self.learning_rate}")
        if not 0.0 < self.background_threshold < 1.0:
            raise ConfigError(
                f"background_threshold must be in (0, 1), got {self.background_threshold}"
            )
        if not 0.0 < self.initial_weight < 1.0:
            raise ConfigError(f"initial_weight must be in (0, 1), got {self.initial_weight}")
        if self.match_lambda <= 0:
            raise ConfigError(f"match_lambda must be > 0, got {self.match_lambda}")
        if self.initial_sigma <= 0:
            raise ConfigError(f"initial_sigma must be > 0, got {self.initial_sigma}")
        if self.variance_floor <= 0:
            raise ConfigError(f"variance_floor must be > 0, got {self.variance_floor}")


@dataclass(frozen=True)
class AugmentedConfig:
    mixture: MixtureConfig = field(default_factory=MixtureConfig)
    # depth range (mm) linearly mapped onto 0..255
    depth_min_mm: float = 0.0
    depth_max_mm: float = 4000.0

    def __post_init__(self):
        if self.depth_max_mm <= self.depth_min_mm:
            raise ConfigError("depth_max_mm must exceed depth_min_mm")


@dataclass(frozen=True)
class FusionConfig:
    counter_limit: int = 3
    initial_label: int = 0

    def __post_init__(self):
        if self.counter_limit < 1:
            raise ConfigError(f"counter_limit must be >= 1, got {self.counter_limit}")
        if self.initial_label not in (0, 1):
            raise ConfigError(f"initial_label must be 0 or 1, got {self.initial_label}")


@dataclass(frozen=True)
class EngineConfig:
    workers: int = 0  # 0 = auto-detect
    pipeline: bool = True
    pipeline_depth: int = 3

    def __post_init__(self):
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0, got {self.workers}")
        if self.pipeline_depth != 3:
            raise ConfigError("pipeline_depth is fixed at 3")


@dataclass(frozen=True)
class RegistrationConfig:
    dilation_radius: int = 1

    def __post_init__(self):
        if self.dilation_radius < 0:
            raise ConfigError("dilation_radius must be >= 0")


@dataclass(frozen=True)
class EvalConfig:
    warmup_frames: int = 30

    def __post_init__(self):
        if self.warmup_frames < 0:
            raise ConfigError("warmup_frames must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    color: MixtureConfig = field(default_factory=MixtureConfig)
    depth: MixtureConfig = field(
        default_factory=lambda: MixtureConfig(initial_sigma=100.0)
    )
    augmented: AugmentedConfig = field(default_factory=AugmentedConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    registration: RegistrationConfig = field(default_factory=RegistrationConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return _build(cls, data, "config")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


_NESTED = {
    "color": MixtureConfig,
    "depth": MixtureConfig,
    "mixture": MixtureConfig,
    "augmented": AugmentedConfig,
    "fusion": FusionConfig,
    "engine": EngineConfig,
    "registration": RegistrationConfig,
    "evaluation": EvalConfig,
}


def _build(cls, data: Any, where: str):
    """Build a dataclass from a (possibly partial) dict; missing keys keep defaults."""
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED and isinstance(value, dict):
            base = getattr(cls(), key)
            merged = {**asdict(base), **value}
            kwargs[key] = _build(_NESTED[key], merged, f"{where}.{key}")
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
