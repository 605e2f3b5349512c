"""Experiment configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .encoders import ENCODER_KINDS, EncoderConfig
from .pooling import STRATEGIES


class ConfigError(ValueError):
    pass


# Settings with no established published value; every results file lists them.
ASSUMED_DEFAULTS = ("epochs", "batch_size", "pos_dim", "embedding_init", "holdout_fraction", "nesterov_variant",
                    "classifier_activation", "gradient_clipping")


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    encoder: str = "BiLSTM"
    pooling: str = "ENT-DEP1"
    train_path: str | None = None
    test_path: str | None = None
    dev_path: str | None = None
    embeddings_path: str | None = None
    output_dir: str = "runs"
    negative_label: str = "no_relation"

    learning_rate: float = 0.5
    momentum: float = 0.8
    nesterov: bool = True
    word_dropout: float = 0.7
    dropout: float = 0.5
    dropconnect: float = 0.5

    word_dim: int = 300
    embedding_init: float = 0.25
    pos_dim: int = 30
    lstm_layers: int = 2
    lstm_hidden: int = 300
    cnn_windows: list[int] = field(default_factory=lambda: [2, 3, 4, 5])
    cnn_filters: int = 200
    gcn_layers: int = 2
    gcn_hidden: int = 300
    ff_hidden: int = 1000

    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    epochs: int = 30
    batch_size: int = 32
    weighted_sampling: bool = True
    holdout_fraction: float = 0.1
    precision: str = "float32"
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.encoder not in ENCODER_KINDS:
            raise ConfigError(f"encoder must be one of {ENCODER_KINDS}, got {self.encoder!r}")
        if self.pooling not in STRATEGIES:
            raise ConfigError(f"pooling must be one of {STRATEGIES}, got {self.pooling!r}")
        if not self.seeds:
            raise ConfigError("seeds must be a non-empty list")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds must be distinct, got {self.seeds}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must lie in [0, 1)")
        for key in ("word_dropout", "dropout", "dropconnect"):
            if not 0 <= getattr(self, key) < 1:
                raise ConfigError(f"{key} must lie in [0, 1)")
        if not 0 <= self.holdout_fraction < 1:
            raise ConfigError("holdout_fraction must lie in [0, 1)")
        if self.precision not in ("float32", "float64"):
            raise ConfigError("precision must be float32 or float64")
        for key in ("word_dim", "pos_dim", "lstm_layers", "lstm_hidden", "cnn_filters", "gcn_layers",
                    "gcn_hidden", "ff_hidden", "epochs", "batch_size", "jobs"):
            if int(getattr(self, key)) < 1:
                raise ConfigError(f"{key} must be a positive integer")
        if self.embedding_init <= 0:
            raise ConfigError("embedding_init must be positive")
        if not self.cnn_windows or min(self.cnn_windows) < 1:
            raise ConfigError("cnn_windows must be a non-empty list of positive sizes")

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            kind=self.encoder,
            lstm_layers=self.lstm_layers,
            lstm_hidden=self.lstm_hidden,
            cnn_windows=tuple(self.cnn_windows),
            cnn_filters=self.cnn_filters,
            gcn_layers=self.gcn_layers,
            gcn_hidden=self.gcn_hidden,
            layer_dropout=self.dropout,
            dropconnect=self.dropconnect,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        data = dict(data)
        if base_dir is not None:
            for key in ("train_path", "test_path", "dev_path", "embeddings_path", "output_dir"):
                if data.get(key):
                    p = Path(data[key])
                    data[key] = str(p if p.is_absolute() else base_dir / p)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
        return cls.from_dict(data, base_dir=path.parent)
