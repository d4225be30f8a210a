"""Experiment configuration and its YAML representation.

Keys mirror the dataclass field names; nested blocks ``params``, ``kernel``
and ``synth`` map onto :class:`WarHyperParams`, :class:`KernelSpec` and
:class:`SynthConfig`.  Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from ..ensemble import Mode
from ..exceptions import ConfigError
from ..features import SynthConfig
from ..kernel import KernelSpec
from ..offline import WarHyperParams

OFFLINE_ONLY = {"wAR", "wARSDS", "ARRLS"}
ONLINE_ONLY = {"OwAR", "OwARSDS"}
SHARED = {"TL", "TLSDS", "TargetOnly", "OracleUpperBound"}
ALGORITHMS = OFFLINE_ONLY | ONLINE_ONLY | SHARED

DEFAULT_ALGORITHMS = {
    Mode.OFFLINE: ("wAR", "wARSDS", "ARRLS", "TL", "TLSDS", "TargetOnly", "OracleUpperBound"),
    Mode.ONLINE: ("OwAR", "OwARSDS", "TL", "TLSDS", "TargetOnly", "OracleUpperBound"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    mode: Mode = Mode.OFFLINE
    algorithms: tuple = ()
    p: int = 5
    max_iterations: int = 21
    runs_per_subject: int = 30
    params: WarHyperParams = field(default_factory=WarHyperParams)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    k: int = 2
    synth: SynthConfig = field(default_factory=SynthConfig)
    seed: int = 0
    output_dir: str = "results"
    n_components: int = 20
    subjects: Optional[tuple] = None  # held-out subject indices; None = every domain
    data_dir: Optional[str] = None  # load domains from files instead of generating
    weight_metric: str = "accuracy"

    def __post_init__(self):
        mode = Mode(self.mode)
        object.__setattr__(self, "mode", mode)
        algos = tuple(self.algorithms) or DEFAULT_ALGORITHMS[mode]
        object.__setattr__(self, "algorithms", algos)
        if self.subjects is not None:
            object.__setattr__(self, "subjects", tuple(int(s) for s in self.subjects))
        unknown = set(algos) - ALGORITHMS
        if unknown:
            raise ConfigError(f"unknown algorithms: {sorted(unknown)}")
        banned = OFFLINE_ONLY if mode is Mode.ONLINE else ONLINE_ONLY
        if set(algos) & banned:
            raise ConfigError(f"{sorted(set(algos) & banned)} cannot run in {mode.value} mode")
        if self.p < 1 or self.runs_per_subject < 1 or self.max_iterations < 1:
            raise ConfigError("p, runs_per_subject and max_iterations must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.weight_metric not in ("accuracy", "bca"):
            raise ConfigError(f"weight_metric must be 'accuracy' or 'bca'")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_NESTED = {"params": WarHyperParams, "kernel": KernelSpec, "synth": SynthConfig}


def _build(cls, data: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    extra = set(data) - names
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data or {})
    for key, cls in _NESTED.items():
        if key in data:
            data[key] = _build(cls, dict(data[key] or {}), key)
    return _build(ExperimentConfig, data, "config")


def _plain(value: Any) -> Any:
    if isinstance(value, enum.Enum):
        return value.value
    if dataclasses.is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def config_to_dict(config: ExperimentConfig) -> dict:
    return _plain(config)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)


def dump_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(config), sort_keys=False))
