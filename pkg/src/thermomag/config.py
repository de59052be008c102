"""Flat ``key = value`` config files for ``thermomag simulate``.

Blank lines and lines starting with ``#`` are ignored.  Keys are the fields of
:class:`~thermomag.estimation_sim.SimConfig`; ``phi`` also accepts ``opt``.
"""
from __future__ import annotations

import dataclasses
from pathlib import Path

from .estimation_sim import SimConfig


class ConfigError(ValueError):
    def __init__(self, source, line, message):
        self.source, self.line = source, line
        where = f"{source}:{line}" if line else str(source)
        super().__init__(f"{where}: {message}")


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}
_INT_KEYS = {"twoS", "shots", "replications", "seed", "grid_points", "jobs"}
_STR_KEYS = {"kind"}


def _convert(key, raw):
    if key in _STR_KEYS:
        return raw
    if key == "phi" and raw == "opt":
        return raw
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def parse_config(text: str, source="<config>") -> SimConfig:
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.split("#", 1)[0].strip()
        if not sep or not key:
            raise ConfigError(source, lineno, f"expected 'key = value', got {line!r}")
        if key not in _FIELDS:
            raise ConfigError(source, lineno, f"unknown key {key!r}")
        if key in values:
            raise ConfigError(source, lineno, f"duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError:
            raise ConfigError(source, lineno, f"bad value {raw!r} for {key!r}") from None
        lines[key] = lineno
    missing = [
        name
        for name, f in _FIELDS.items()
        if f.default is dataclasses.MISSING and name not in values
    ]
    if missing:
        raise ConfigError(source, 0, f"missing required keys: {', '.join(missing)}")
    try:
        return SimConfig(**values)
    except ValueError as exc:
        raise ConfigError(source, 0, str(exc)) from None


def load_config(path) -> SimConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=path)
