"""Run configuration: one JSON file driving every pipeline command.

Sections mirror the dataclasses they configure; every field is optional
and falls back to that dataclass default.  Unknown keys are rejected at
any level so a typo cannot silently revert a field to its default.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any, Mapping

from .campaign import ScenarioSpec
from .detector import TrainingConfig
from .metrics import DEFAULT_EPSILON
from .receiver import DEFAULT_FEATURE_LENGTH
from .waveform import GridConfig

_SECTION_TYPES = {
    "scenario": ScenarioSpec,
    "grid": GridConfig,
    "detector": TrainingConfig,
}

_SCALAR_DEFAULTS = {
    "feature_length": DEFAULT_FEATURE_LENGTH,
    "epsilon": DEFAULT_EPSILON,
    "train_fraction": 0.7,
    "split_seed": 0,
    "workers": 1,
    "out_dir": "out",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for the command-line pipeline."""

    scenario: ScenarioSpec = ScenarioSpec()
    grid: GridConfig = GridConfig()
    detector: TrainingConfig = TrainingConfig()
    feature_length: int = DEFAULT_FEATURE_LENGTH
    epsilon: float = DEFAULT_EPSILON
    train_fraction: float = 0.7
    split_seed: int = 0
    workers: int = 1
    out_dir: str = "out"

    def __post_init__(self) -> None:
        if self.feature_length <= 0:
            raise ValueError("feature_length must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def _build_section(name: str, cls: type, data: Mapping[str, Any]) -> Any:
    field_names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - field_names)
    if unknown:
        raise ValueError(f"unknown {name} keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: Mapping[str, Any]) -> RunConfig:
    """Build a RunConfig from parsed JSON, rejecting unknown keys."""
    known = set(_SECTION_TYPES) | set(_SCALAR_DEFAULTS)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTION_TYPES.items():
        section = data.get(name, {})
        if not isinstance(section, Mapping):
            raise ValueError(f"config section {name!r} must be an object")
        kwargs[name] = _build_section(name, cls, section)
    for name in _SCALAR_DEFAULTS:
        if name in data:
            kwargs[name] = data[name]
    return RunConfig(**kwargs)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    return config_from_dict(data)


def config_to_dict(config: RunConfig) -> dict[str, Any]:
    """Plain-JSON form of a config, suitable for echoing into a run dir."""

    def _plain(value: Any) -> Any:
        if isinstance(value, tuple):
            return [_plain(v) for v in value]
        return value

    out: dict[str, Any] = {}
    for name, cls in _SECTION_TYPES.items():
        section = getattr(config, name)
        out[name] = {
            f.name: _plain(getattr(section, f.name)) for f in dataclasses.fields(cls)
        }
    for name in _SCALAR_DEFAULTS:
        out[name] = getattr(config, name)
    return out


def save_config(path: str, config: RunConfig) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
