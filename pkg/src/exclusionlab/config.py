"""Flat key-value experiment configuration with lossless round-tripping.

The file format is one ``key = value`` pair per line, ``#`` comments allowed.
Values keep their declared types (int, float, str, int list, float list), so
a config written by :func:`dumps` parses back to an equal object; run
manifests embed the same canonical text.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional


class ConfigError(ValueError):
    pass


def _parse_int_list(text: str):
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_float_list(text: str):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _fmt_list(values) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a command needs: instance size, grids, budgets, determinism."""

    command: Optional[str] = None
    k: Optional[int] = None
    N: Optional[int] = None
    m: Optional[int] = None
    R: Optional[int] = None
    delta: Optional[float] = None
    eps: Optional[float] = None
    eps_list: Optional[tuple] = None
    t_grid: Optional[tuple] = None
    N_list: Optional[tuple] = None
    n_runs: Optional[int] = None
    seed: int = 0
    out: str = "runs"
    mode: str = "exact"
    max_states: int = 200_000
    max_events: int = 1_000_000

    def __post_init__(self) -> None:
        if self.max_states <= 0 or self.max_events <= 0:
            raise ConfigError("budget caps must be positive")
        if self.t_grid is not None:
            grid = tuple(float(t) for t in self.t_grid)
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("t_grid must be strictly increasing")
            object.__setattr__(self, "t_grid", grid)
        if self.eps_list is not None:
            object.__setattr__(
                self, "eps_list", tuple(float(e) for e in self.eps_list)
            )
        if self.N_list is not None:
            object.__setattr__(self, "N_list", tuple(int(n) for n in self.N_list))

    def replace(self, **overrides) -> "ExperimentConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig(**data)

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"missing required config keys: {', '.join(missing)}")


_PARSERS = {
    "command": str,
    "k": int,
    "N": int,
    "m": int,
    "R": int,
    "delta": float,
    "eps": float,
    "eps_list": _parse_float_list,
    "t_grid": _parse_float_list,
    "N_list": _parse_int_list,
    "n_runs": int,
    "seed": int,
    "out": str,
    "mode": str,
    "max_states": int,
    "max_events": int,
}


def loads(text: str) -> ExperimentConfig:
    data = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            data[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return ExperimentConfig(**data)


def load(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if isinstance(value, tuple):
            rendered = _fmt_list(value)
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def dump(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cfg))
