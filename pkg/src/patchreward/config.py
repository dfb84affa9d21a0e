"""Run settings: metric configuration plus GRPO/filter/split knobs.

Config files are either a JSON object or ``key = value`` lines (``#``
comments allowed; list values as JSON or comma-separated numbers).
Precedence: explicit overrides > file > defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from .dataset import DEFAULT_RATIOS
from .grpo import DEFAULT_BETA, DEFAULT_CLIP_EPS, DEFAULT_EPSILON
from .metrics import MetricConfig
from .rejection import DEFAULT_THRESHOLD


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Settings:
    metric: MetricConfig = field(default_factory=MetricConfig)
    epsilon: float = DEFAULT_EPSILON
    clip_eps: float = DEFAULT_CLIP_EPS
    beta: float = DEFAULT_BETA
    threshold: float = DEFAULT_THRESHOLD
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    seed: int | None = None


_METRIC_KEYS = {f.name for f in fields(MetricConfig)}
_RUN_KEYS = {f.name for f in fields(Settings)} - {"metric"}


def _parse_value(raw: str) -> Any:
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if "," in raw:
        try:
            return [float(x) for x in raw.split(",")]
        except ValueError:
            pass
    return raw


def parse_config_text(text: str) -> dict:
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc.msg}") from exc
        return dict(data)
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = _parse_value(value)
    return out


def load_config_file(path: str | Path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def build_settings(*layers: Mapping[str, Any] | None) -> Settings:
    """Merge layers left to right (later wins), ignoring ``None`` values."""
    merged: dict[str, Any] = {}
    for layer in layers:
        if not layer:
            continue
        for key, value in layer.items():
            if value is None:
                continue
            if key not in _METRIC_KEYS and key not in _RUN_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    try:
        metric = MetricConfig(**{k: v for k, v in merged.items() if k in _METRIC_KEYS})
        run = {k: v for k, v in merged.items() if k in _RUN_KEYS}
        if "ratios" in run:
            run["ratios"] = tuple(float(x) for x in run["ratios"])
        if "seed" in run:
            run["seed"] = int(run["seed"])
        for key in ("epsilon", "clip_eps", "beta", "threshold"):
            if key in run:
                run[key] = float(run[key])
        return Settings(metric=metric, **run)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
