"""
Configuration — graph parameters and the flat run configuration file.

gratr.json at the repo root holds the run defaults. Values are merged as
defaults < environment < file < CLI flags, and unknown keys are rejected.
"""
import json
import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Mapping, Optional

from backend.errors import ConfigError

_DEFAULT_CONFIG_FILE = os.path.join(os.path.dirname(os.path.dirname(__file__)), "gratr.json")


@dataclass(frozen=True)
class GraphConfig:
    decay: float = 0.9
    epsilon: float = 0.3
    gamma: float = 0.1
    top_w: int = 3
    history_cap: int = 15
    denom_floor: float = 0.01

    def __post_init__(self) -> None:
        if not (0.0 < self.decay <= 1.0):
            raise ConfigError(f"decay must be in (0, 1], got {self.decay}")
        if not (0.0 <= self.epsilon < 1.0):
            raise ConfigError(f"epsilon must be in [0, 1), got {self.epsilon}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if isinstance(self.top_w, bool) or not isinstance(self.top_w, int) or self.top_w < 1:
            raise ConfigError(f"top_w must be a positive integer, got {self.top_w!r}")
        if isinstance(self.history_cap, bool) or not isinstance(self.history_cap, int) or self.history_cap < 1:
            raise ConfigError(f"history_cap must be a positive integer, got {self.history_cap!r}")
        if not (self.denom_floor > 0.0 and math.isfinite(self.denom_floor)):
            raise ConfigError(f"denom_floor must be > 0, got {self.denom_floor}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GraphConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown graph config keys: {sorted(unknown)}")
        return cls(**dict(data))


GRAPH_KEYS = tuple(f.name for f in fields(GraphConfig))

DEFAULT_CONFIG: Dict[str, Any] = {
    **GraphConfig().to_dict(),
    "backend": "scripted",
    "provider": "chat",
    "model": "gpt-4o-mini",
    "temperature": 0.3,
    "extraction_fixture": "data/werewolf_extraction.jsonl",
    "intent_fixture": "data/intent_extraction.jsonl",
    "dataset": "data/intent_messages.csv",
    "seed": 7,
    "games": 10,
    "opponent": "noop",
    "workers": 1,
    "max_rounds": 15,
    "out": "out",
    "snapshots": False,
}

_BACKENDS = {"scripted", "live"}
_PROVIDERS = {"chat", "gemini"}
_OPPONENTS = {"baseline", "random", "noop"}


@dataclass(frozen=True)
class RunConfig:
    graph: GraphConfig
    backend: str
    provider: str
    model: str
    temperature: float
    extraction_fixture: str
    intent_fixture: str
    dataset: str
    seed: int
    games: int
    opponent: str
    workers: int
    max_rounds: int
    out: str
    snapshots: bool

    def to_dict(self) -> Dict[str, Any]:
        flat = {k: v for k, v in asdict(self).items() if k != "graph"}
        return {**self.graph.to_dict(), **flat}


def _read_file(filepath: str) -> Dict[str, Any]:
    try:
        with open(filepath, "r") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {filepath}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {filepath} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {filepath} must hold a JSON object")
    return data


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _validate(merged: Dict[str, Any]) -> RunConfig:
    unknown = set(merged) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    graph = GraphConfig.from_dict({k: merged[k] for k in GRAPH_KEYS})

    if merged["backend"] not in _BACKENDS:
        raise ConfigError(f"backend must be one of {sorted(_BACKENDS)}, got {merged['backend']!r}")
    if merged["provider"] not in _PROVIDERS:
        raise ConfigError(f"provider must be one of {sorted(_PROVIDERS)}, got {merged['provider']!r}")
    if merged["opponent"] not in _OPPONENTS:
        raise ConfigError(f"opponent must be one of {sorted(_OPPONENTS)}, got {merged['opponent']!r}")
    for key in ("games", "workers", "max_rounds"):
        if not _is_int(merged[key]) or merged[key] < 1:
            raise ConfigError(f"{key} must be an integer >= 1, got {merged[key]!r}")
    if not _is_int(merged["seed"]):
        raise ConfigError(f"seed must be an integer, got {merged['seed']!r}")
    temperature = merged["temperature"]
    if not isinstance(temperature, (int, float)) or not (0.0 <= temperature <= 2.0):
        raise ConfigError(f"temperature must be in [0, 2], got {temperature!r}")
    if not isinstance(merged["snapshots"], bool):
        raise ConfigError("snapshots must be true or false")

    rest = {k: merged[k] for k in DEFAULT_CONFIG if k not in GRAPH_KEYS}
    rest["temperature"] = float(temperature)
    return RunConfig(graph=graph, **rest)


def load_config(
    filepath: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Build the effective RunConfig.

    Args:
        filepath: Explicit config file. Must exist when given. When omitted the
                  repo-level gratr.json is used if present.
        overrides: CLI flag values. Keys mapped to None are ignored.
    """
    merged = dict(DEFAULT_CONFIG)
    env_model = os.environ.get("GRATR_MODEL", "").strip()
    if env_model:
        merged["model"] = env_model

    if filepath is not None:
        merged.update(_read_file(filepath))
    elif os.path.exists(_DEFAULT_CONFIG_FILE):
        merged.update(_read_file(_DEFAULT_CONFIG_FILE))

    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    return _validate(merged)


def resolve_path(path: str) -> str:
    """Relative paths that do not exist from the working directory resolve against the repo root."""
    if os.path.isabs(path) or os.path.exists(path):
        return path
    candidate = os.path.join(os.path.dirname(_DEFAULT_CONFIG_FILE), path)
    return candidate if os.path.exists(candidate) else path
