"""Runtime configuration: defaults, key=value files, and flag overrides.

Precedence, lowest to highest: built-in defaults, then a config file
(given explicitly or via the SYMSCENE_CONFIG environment variable), then
command-line flags.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from symscene.codec import BOX_BLOCK, VECTOR_DIM
from symscene.errors import ConfigError

ENV_CONFIG = "SYMSCENE_CONFIG"

_TRUE_WORDS = {"true", "yes", "on", "1"}
_FALSE_WORDS = {"false", "no", "off", "0"}


@dataclass(frozen=True)
class Config:
    num_classes: int = 1600
    num_attributes: int = 400
    embedding_dim: int = 300
    top_k: int = 5
    score_threshold: float = 0.2
    iou_threshold: float = 0.5
    max_objects: int = 100
    attr_threshold: float = 0.5
    weight_norm: bool = True
    include_captions: bool = False

    def __post_init__(self):
        for name in ("num_classes", "num_attributes", "embedding_dim", "top_k", "max_objects"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("score_threshold", "iou_threshold", "attr_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be within [0, 1], got {value}")
        symbolic = self.top_k * self.embedding_dim + self.embedding_dim + BOX_BLOCK
        if symbolic > VECTOR_DIM:
            raise ConfigError(
                f"top_k={self.top_k} with embedding_dim={self.embedding_dim} needs "
                f"{symbolic} components, more than the {VECTOR_DIM} available"
            )
        raw = self.num_classes + self.num_attributes + BOX_BLOCK
        if raw > VECTOR_DIM:
            raise ConfigError(
                f"num_classes={self.num_classes} plus num_attributes={self.num_attributes} "
                f"needs {raw} components, more than the {VECTOR_DIM} available"
            )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(Config)}


def _parse_value(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if kind == "bool":
        word = raw.lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
        raise ConfigError(f"{key} expects a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key} expects a number, got {raw!r}") from None


def load_config_file(path) -> dict:
    """Read key=value lines; blank lines and #-comments are skipped."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{path}: line {lineno}: {exc}") from None
    return values


def resolve_config(config_path=None, overrides: dict | None = None) -> Config:
    """Combine defaults, an optional config file, and explicit overrides.

    ``overrides`` entries with value None are treated as not given, which
    lets argparse defaults pass through untouched.
    """
    values: dict = {}
    if config_path is None:
        config_path = os.environ.get(ENV_CONFIG) or None
    if config_path is not None:
        values.update(load_config_file(config_path))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = value
    return Config(**values)
