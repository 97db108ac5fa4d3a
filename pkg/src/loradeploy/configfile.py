"""Flat ``key = value`` configuration files for :class:`NetworkConfig`.

Blank lines and ``#`` comments are ignored. Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import os
from pathlib import Path
from typing import Iterable

from .model import NetworkConfig, SpreadFunction

ENV_VAR = "LORADEPLOY_CONFIG"

_FIELDS = {f.name: f for f in dataclasses.fields(NetworkConfig)}


def _convert(key: str, text: str):
    if key not in _FIELDS:
        raise ValueError(f"unknown config key {key!r}; known keys: {', '.join(_FIELDS)}")
    text = text.strip()
    if key == "spread":
        return SpreadFunction.parse(text)
    if key == "snr_thresholds_db":
        return tuple(float(v) for v in text.split(","))
    if key in ("payload_bytes", "cr"):
        return int(text)
    return float(text)


def parse_pairs(pairs: Iterable[str]) -> dict:
    out = {}
    for raw in pairs:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected key = value, got {raw.strip()!r}")
        key = key.strip()
        out[key] = _convert(key, value)
    return out


def load(path, overrides: Iterable[str] = ()) -> NetworkConfig:
    values = parse_pairs(Path(path).read_text(encoding="utf-8").splitlines()) if path else {}
    values.update(parse_pairs(overrides))
    return NetworkConfig(**values)


def resolve(path=None, overrides: Iterable[str] = ()) -> NetworkConfig:
    """Config from ``path``, else from $LORADEPLOY_CONFIG, else defaults; then overrides."""
    path = path or os.environ.get(ENV_VAR) or None
    return load(path, overrides)


def _format(value) -> str:
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps(cfg: NetworkConfig) -> str:
    lines = [f"{name} = {_format(getattr(cfg, name))}" for name in _FIELDS]
    return "\n".join(lines) + "\n"


def one_line(cfg: NetworkConfig) -> str:
    """The resolved config on a single line, for CSV comment headers."""
    return " ".join(f"{name}={_format(getattr(cfg, name))}" for name in _FIELDS)
