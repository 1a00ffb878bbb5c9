"""Flat ``key = value`` configuration files.

One setting per line: ``key = integer`` or ``key = [i, j, ...]``; ``#``
starts a comment. Omitted keys keep the model defaults.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from pathlib import Path

from .model import ConfigError, ModelConfig

_INT_KEYS = ("c_total", "v_total", "mt_total", "dt_total", "dt_min", "p", "alpha", "beta", "a1")
_LIST_KEYS = ("corrupt_mtellers", "rand_values", "perm_values", "delta_values",
              "audit_ch", "audit_lr")
# epistemic options: a strict reverse relation, and which voters' choices the jump re-selects
_RF_INT_KEYS = ("rf_strict",)
_RF_LIST_KEYS = ("rf_reselect",)

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class RfOptions:
    strict: bool = False
    reselect: tuple[int, ...] | None = None


def _parse_value(text: str, lineno: int, want_list: bool):
    if want_list:
        if not (text.startswith("[") and text.endswith("]")):
            raise ConfigError(f"line {lineno}: expected a list like [1, 2]")
        body = text[1:-1].strip()
        if not body:
            return ()
        try:
            return tuple(int(x) for x in body.split(","))
        except ValueError:
            raise ConfigError(f"line {lineno}: list entries must be integers") from None
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: expected an integer, got {text!r}") from None


def parse_config(text: str) -> tuple[ModelConfig, RfOptions]:
    model, rf = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if m is None:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = m.groups()
        if key in _INT_KEYS or key in _LIST_KEYS:
            target = model
        elif key in _RF_INT_KEYS or key in _RF_LIST_KEYS:
            target = rf
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in target:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        target[key] = _parse_value(value, lineno, key in _LIST_KEYS or key in _RF_LIST_KEYS)
    try:
        cfg = ModelConfig(**model)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    opts = RfOptions(bool(rf.get("rf_strict", 0)), rf.get("rf_reselect"))
    if opts.reselect is not None and any(not 0 <= i < cfg.v_total for i in opts.reselect):
        raise ConfigError("rf_reselect names a voter out of range")
    return cfg, opts


def load_config(path) -> ModelConfig:
    return load_settings(path)[0]


def load_settings(path) -> tuple[ModelConfig, RfOptions]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def dump_config(cfg: ModelConfig) -> dict:
    """JSON-friendly echo of a config."""
    out = {}
    for f in fields(cfg):
        if f.name == "group":
            continue
        val = getattr(cfg, f.name)
        out[f.name] = list(val) if isinstance(val, tuple) else val
    return out
