"""
Configuration for factorization and end-to-end training.

This module handles:
- The two frozen config records (NmfConfig, TrainConfig) and their defaults
- Reading flat ``key = value`` files
- Merging file values with command-line overrides
- Echoing the effective configuration into output files
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

from garec.exceptions import ValidationError
from garec.utils import logger, require_in_range, require_positive, throw

LOGGER = logger("config")

ACTIVATIONS = ("identity", "tanh", "relu")

_KEY_ALIASES = {
    "T": "cap",
    "d'": "d_prime",
    "lr": "learning_rate",
}


@dataclass(frozen=True)
class NmfConfig:
    d: int = 16
    max_iters: int = 200
    rel_tol: float = 1e-4
    epsilon: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        require_positive("d", self.d)
        require_positive("max_iters", self.max_iters)
        require_positive("rel_tol", self.rel_tol, allow_zero=True)
        require_positive("epsilon", self.epsilon)


@dataclass(frozen=True)
class TrainConfig:
    """Every hyperparameter of a training run in one auditable record.

    ``hidden_sizes`` defaults to ``(d, d // 2)`` when left empty.
    """

    learning_rate: float = 1e-3
    batch_size: int = 256
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0
    freeze_factors: bool = False
    cap: int = 50
    d: int = 16
    d_prime: int = 16
    activation: str = "tanh"
    validation_fraction: float = 0.1
    hidden_sizes: tuple[int, ...] = field(default_factory=tuple)
    separate_query_key: bool = False
    n_jobs: int = 1
    init_scale: float = 0.01
    nmf_max_iters: int = 200
    nmf_rel_tol: float = 1e-4
    nmf_epsilon: float = 1e-9

    def __post_init__(self):
        require_positive("learning_rate", self.learning_rate)
        require_positive("batch_size", self.batch_size)
        require_positive("max_epochs", self.max_epochs)
        require_positive("patience", self.patience)
        require_positive("cap", self.cap)
        require_positive("d", self.d)
        require_positive("d_prime", self.d_prime)
        require_positive("n_jobs", self.n_jobs)
        require_positive("init_scale", self.init_scale, allow_zero=True)
        require_in_range("validation_fraction", self.validation_fraction, 0.0, 0.5)
        if self.activation not in ACTIVATIONS:
            throw(f"activation must be one of {', '.join(ACTIVATIONS)}, got {self.activation!r}")
        if not self.hidden_sizes:
            object.__setattr__(self, "hidden_sizes", (self.d, max(1, self.d // 2)))
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        for size in self.hidden_sizes:
            require_positive("hidden_sizes entry", size)

    def nmf_config(self) -> NmfConfig:
        return NmfConfig(
            d=self.d,
            max_iters=self.nmf_max_iters,
            rel_tol=self.nmf_rel_tol,
            epsilon=self.nmf_epsilon,
            seed=self.seed,
        )


def _to_bool(value: object) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in {"1", "true", "t", "yes", "y", "on"}:
        return True
    if text in {"0", "false", "f", "no", "n", "off"}:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _to_sizes(value: object) -> tuple[int, ...]:
    if isinstance(value, list | tuple):
        return tuple(int(v) for v in value)
    text = str(value).strip().strip("()[]")
    if not text:
        return ()
    return tuple(int(part) for part in text.split(",") if part.strip())


def _coercers() -> dict:
    coercers = {}
    for f in dataclasses.fields(TrainConfig):
        if f.name == "hidden_sizes":
            coercers[f.name] = _to_sizes
            continue
        kind = type(f.default)
        if kind is bool:
            coercers[f.name] = _to_bool
        elif kind is int:
            coercers[f.name] = lambda v: int(str(v).strip())
        elif kind is float:
            coercers[f.name] = lambda v: float(str(v).strip())
        else:
            coercers[f.name] = lambda v: str(v).strip()
    return coercers


def read_config_file(path: str) -> dict[str, str]:
    """Read a flat ``key = value`` file. Comments start with ``#``; blank lines are ignored.

    Returns the raw string values keyed by canonical field name.
    """
    if not os.path.exists(path):
        throw(f"Config file not found: {path}")
    data: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if " #" in line:
                line = line.split(" #", 1)[0].strip()
            if "=" not in line:
                throw(f"{path}:{line_no}: expected 'key = value', got {raw.rstrip()!r}")
            key, val = line.split("=", 1)
            key = key.strip()
            data[_KEY_ALIASES.get(key, key)] = val.strip().strip("'\"")
    return data


def _coerce(values: dict) -> dict:
    coercers = _coercers()
    result = {}
    for key, raw in values.items():
        name = _KEY_ALIASES.get(key, key)
        if name not in coercers:
            throw(f"Unknown config key '{key}'")
        try:
            result[name] = coercers[name](raw)
        except (TypeError, ValueError) as e:
            throw(f"Bad value for config key '{key}': {raw!r} ({e})")
    return result


def load_config(path: str | None = None, overrides: dict | None = None) -> TrainConfig:
    """Build the effective TrainConfig: defaults, then file values, then non-None overrides."""
    values: dict = {}
    if path:
        values.update(_coerce(read_config_file(path)))
        LOGGER.info(f"Loaded {len(values)} config value(s) from {path}")
    if overrides:
        values.update(_coerce({k: v for k, v in overrides.items() if v is not None}))
    try:
        return TrainConfig(**values)
    except TypeError as e:
        raise ValidationError(str(e))


def config_echo(cfg: TrainConfig | NmfConfig) -> dict:
    """Plain-dict rendition of a config, JSON-safe."""
    echo = dataclasses.asdict(cfg)
    for key, value in echo.items():
        if isinstance(value, tuple):
            echo[key] = list(value)
    return echo


def train_config_from_echo(echo: dict) -> TrainConfig:
    known = {f.name for f in dataclasses.fields(TrainConfig)}
    return TrainConfig(**_coerce({k: v for k, v in echo.items() if k in known}))
