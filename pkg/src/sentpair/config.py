"""Flat key=value run configuration.

One option per line, ``key = value``; blank lines and ``#`` comments are
ignored. Unknown keys are rejected so a typo cannot silently fall back to a
default. The serialized form is embedded verbatim in checkpoints, making
every trained artifact carry its exact configuration.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass
class Config:
    # task / architecture variant
    task: str = "relatedness"
    topology: str = "I"
    stage1_per_plane: bool = False
    bidirectional: bool = True
    # encoder dims
    d: int = 100
    layers: int = 2
    word_dim: int = 300
    # char path dims
    char_l0: int = 16
    char_width: int = 3
    char_frames: int = 100
    char_hidden: int = 50
    char_dim: int = 100
    # matching CNN frame counts
    stage1_frames: int = 150
    stage2_frames: int = 150
    # training
    learning_rate: float = 0.05
    batch_size: int = 25
    l2: float = 1e-4
    epochs: int = 10
    seed: int = 1
    adagrad_eps: float = 1e-8
    max_len: int = 37
    grad_clip: float = 0.0  # 0 disables clipping
    # word vectors: path to a GloVe-format file; empty means a seeded
    # random table built from the training vocabulary
    embeddings: str = ""

    def validate(self) -> "Config":
        if self.task not in ("relatedness", "entailment"):
            raise ValueError(f"task must be 'relatedness' or 'entailment', got {self.task!r}")
        if self.topology not in ("I", "II"):
            raise ValueError(f"topology must be 'I' or 'II', got {self.topology!r}")
        positives = ("d", "layers", "word_dim", "char_l0", "char_width", "char_frames",
                     "char_hidden", "char_dim", "stage1_frames", "stage2_frames",
                     "batch_size", "epochs", "max_len")
        for name in positives:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.adagrad_eps <= 0:
            raise ValueError(f"adagrad_eps must be > 0, got {self.adagrad_eps}")
        if self.grad_clip < 0:
            raise ValueError(f"grad_clip must be >= 0, got {self.grad_clip}")
        if self.char_l0 < self.char_width:
            raise ValueError(
                f"char_l0 ({self.char_l0}) must be >= char_width ({self.char_width})"
            )
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(Config)}


def _parse_value(name: str, raw: str):
    kind = _FIELDS[name].type
    raw = raw.strip()
    if kind == "bool":
        if raw.lower() in ("true", "yes", "1"):
            return True
        if raw.lower() in ("false", "no", "0"):
            return False
        raise ValueError(f"config key {name}: expected a boolean, got {raw!r}")
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"config key {name}: expected an integer, got {raw!r}") from None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"config key {name}: expected a number, got {raw!r}") from None
    return raw


def parse_config(text: str) -> Config:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELDS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    return Config(**values).validate()


def load_config(path: str) -> Config:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def serialize_config(cfg: Config) -> str:
    lines = []
    for f in dataclasses.fields(Config):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
