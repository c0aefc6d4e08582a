"""Training hyperparameters and the flat ``key = value`` config file."""

from __future__ import annotations

import ast
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ..errors import ConfigurationError
from ..model import ModelConfig

DATA_SOURCES = ("synthetic", "corpus")


@dataclass(frozen=True)
class TrainingConfig:
    mu: float = 0.5
    lr: float = 5e-4
    batch: int = 4
    epochs: int = 80
    chunk_seconds: float = 3.0
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0)
    seed: int = 0
    data_source: str = "synthetic"
    synthetic_pairs: int = 64
    synthetic_seconds: float | None = None
    clean_dir: str | None = None
    noisy_dir: str | None = None
    max_steps: int | None = None
    clip_norm: float | None = 5.0
    checkpoint_path: str | None = None
    log_every: int = 10

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if not 0.0 <= self.mu <= 1.0:
            raise ConfigurationError(f"mu must lie in [0, 1], got {self.mu}")
        if self.lr < 0.0:
            raise ConfigurationError(f"lr must be non-negative, got {self.lr}")
        if self.batch < 1 or self.epochs < 1:
            raise ConfigurationError("batch and epochs must be >= 1")
        if self.chunk_seconds <= 0.0:
            raise ConfigurationError(f"chunk_seconds must be positive, got {self.chunk_seconds}")
        if not self.snr_grid_db:
            raise ConfigurationError("snr_grid_db must not be empty")
        if self.data_source not in DATA_SOURCES:
            raise ConfigurationError(f"data_source must be one of {DATA_SOURCES}, got {self.data_source!r}")
        if self.data_source == "corpus" and not (self.clean_dir and self.noisy_dir):
            raise ConfigurationError("corpus data needs clean_dir and noisy_dir")
        if self.synthetic_pairs < 1:
            raise ConfigurationError("synthetic_pairs must be >= 1")
        if self.max_steps is not None and self.max_steps < 0:
            raise ConfigurationError("max_steps must be >= 0")
        if self.clip_norm is not None and self.clip_norm <= 0.0:
            raise ConfigurationError("clip_norm must be positive or None")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_grid_db"] = list(self.snr_grid_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigurationError(f"unknown training config keys: {sorted(unknown)}")
        return cls(**d)


def parse_config_text(text: str) -> tuple[ModelConfig, TrainingConfig]:
    """Parse ``key = value`` lines; keys are the field names of both configs.

    Values are Python literals (``0.5``, ``(1, 2, 4, 8)``, ``'dual'``,
    ``None``); bare words are taken as strings. ``#`` starts a comment.
    """
    model_keys = {f.name for f in fields(ModelConfig)}
    train_keys = {f.name for f in fields(TrainingConfig)}
    model_kw, train_kw = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            parsed = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            parsed = value
        if key in model_keys:
            model_kw[key] = parsed
        elif key in train_keys:
            train_kw[key] = parsed
        else:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in model_kw and key in train_kw:
            raise ConfigurationError(f"line {lineno}: key {key!r} is ambiguous")
    try:
        return ModelConfig(**model_kw), TrainingConfig(**train_kw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_config(path) -> tuple[ModelConfig, TrainingConfig]:
    return parse_config_text(Path(path).read_text())


def format_config(model: ModelConfig, training: TrainingConfig) -> str:
    lines = [f"{k} = {v!r}" for k, v in model.to_dict().items()]
    lines += [f"{k} = {v!r}" for k, v in training.to_dict().items()]
    return "\n".join(lines) + "\n"
