"""Run configuration and deterministic CSV/JSON output.

Configuration files are plain ``key = value`` lines; ``#`` starts a comment.
Every output CSV starts with ``# key: value`` metadata lines (including a
hash of the resolved configuration) followed by one header row. Floats are
written with 17 significant digits so that files round-trip exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .geometry import Profile, WaveParams, make_cone, make_spindle

FLOAT_FMT = "{:.17g}"


class ConfigError(DomainError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


# key -> (type, default); types are applied in RunConfig.from_mapping
_SCHEMA = {
    "geometry": (str, "cone"),
    "alpha": (float, 0.05),
    "x1": (float, 0.0),
    "x2": (float, 10.0),
    "k": (float, 1000.0),
    "eta": (float, 0.0),
    "etas": (_floats, (1e-3, 2e-3, 4e-3)),
    "theta": (float, 0.0),
    "grid": (str, "y"),
    "y0": (float, 0.0),
    "y1": (float, 20.0),
    "x0": (float, math.nan),
    "x_end": (float, math.nan),
    "nodes": (int, 801),
    "solver": (str, "marching"),
    "max_terms": (int, 12),
    "start": (str, "doubled"),
    "n_max": (int, -1),
    "tolerance": (float, 1e-8),
    "mode": (int, 0),
    "x_star": (float, math.nan),
    "r_star": (float, math.nan),
    "xs": (_floats, ()),
    "rs": (_floats, ()),
    "phi": (float, 0.0),
    "theta_min": (float, 0.0),
    "theta_max": (float, 0.05),
    "n_theta": (int, 11),
    "phis": (_floats, (0.0,)),
    "check": (int, 1),
    "planes": (_floats, ()),
    "q_max": (float, 3.0),
    "n_q": (int, 25),
    "y_pen": (float, 100.0),
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration (all keys of the schema, typed).

    ``eta = 0`` means "extrapolate to real k from ``etas``"; a positive value
    runs once at ``Im k = eta Re k``.
    """

    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        vals = {k: d for k, (_, d) in _SCHEMA.items()}
        for key, text in raw.items():
            if key not in _SCHEMA:
                raise ConfigError(key, "unknown key")
            typ = _SCHEMA[key][0]
            try:
                vals[key] = typ(text) if isinstance(text, str) else (
                    tuple(text) if typ is _floats else typ(text))
            except (TypeError, ValueError):
                raise ConfigError(key, f"cannot parse {text!r}") from None
        cfg = cls(vals)
        cfg.check()
        return cfg

    def check(self):
        v = self.values
        if v["geometry"] not in ("cone", "spindle"):
            raise ConfigError("geometry", "must be 'cone' or 'spindle'")
        if v["grid"] not in ("x", "y"):
            raise ConfigError("grid", "must be 'x' or 'y'")
        if v["solver"] not in ("marching", "neumann", "analytic"):
            raise ConfigError("solver", "must be marching, neumann or analytic")
        if v["start"] not in ("doubled", "incident"):
            raise ConfigError("start", "must be 'doubled' or 'incident'")
        if v["nodes"] < 3:
            raise ConfigError("nodes", "need at least 3 nodes")
        if v["eta"] < 0:
            raise ConfigError("eta", "must be non-negative")
        if v["eta"] == 0 and (len(v["etas"]) < 1 or min(v["etas"]) <= 0):
            raise ConfigError("etas", "need positive values for extrapolation")
        if not v["tolerance"] > 0:
            raise ConfigError("tolerance", "must be positive")
        if v["max_terms"] < 1:
            raise ConfigError("max_terms", "must be at least 1")
        try:
            self.profile()
        except DomainError as exc:
            raise ConfigError("geometry", str(exc)) from None
        try:
            self.wave()
        except DomainError as exc:
            raise ConfigError("k", str(exc)) from None

    def profile(self) -> Profile:
        v = self.values
        if v["geometry"] == "cone":
            return make_cone(v["alpha"])
        return make_spindle(v["alpha"], v["x1"], v["x2"])

    def wave(self, eta: float | None = None) -> WaveParams:
        e = self.values["eta"] if eta is None else eta
        return WaveParams.from_eta(self.values["k"], e, self.values["theta"])

    @property
    def run_etas(self) -> tuple:
        return (self.values["eta"],) if self.values["eta"] > 0 else tuple(self.values["etas"])

    def canonical(self) -> str:
        """Sorted ``key = value`` text used for hashing."""
        return "\n".join(f"{k} = {_fmt_value(self.values[k])}" for k in sorted(self.values))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _fmt_value(v):
    if isinstance(v, tuple):
        return ",".join(_fmt_value(x) for x in v)
    if isinstance(v, float):
        return FLOAT_FMT.format(v)
    return str(v)


def parse_config_text(text: str) -> dict:
    """``key = value`` lines to a dict; blank lines and ``#`` comments skipped."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = val
    return out


def load_config(path: str | None = None, overrides: Sequence[str] = (),
                base: dict | None = None) -> RunConfig:
    """Read a config file (optional) and apply ``key=value`` overrides in order."""
    raw = dict(base or {})
    if path is not None:
        raw.update(parse_config_text(Path(path).read_text()))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, val = (s.strip() for s in item.split("=", 1))
        raw[key] = val
    return RunConfig.from_mapping(raw)


# ------------------------------------------------------------------ output


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], meta: dict) -> str:
    lines = [f"# {k}: {_fmt_value(meta[k])}" for k in meta]
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match the header")
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_table(out_dir: str | Path, name: str, columns: Sequence[str], rows,
                meta: dict) -> Path:
    """Write ``name.csv`` and its JSON mirror ``name.json``; returns the CSV path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [list(r) for r in rows]
    path = out / f"{name}.csv"
    path.write_text(csv_text(columns, rows, meta))
    mirror = {"meta": {k: _json_value(v) for k, v in meta.items()},
              "columns": list(columns),
              "rows": [[_json_value(v) for v in r] for r in rows]}
    (out / f"{name}.json").write_text(json.dumps(mirror, indent=1, sort_keys=True) + "\n")
    return path


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    return v


def read_table(path: str | Path) -> tuple[dict, list, np.ndarray]:
    """Inverse of :func:`write_table` for numeric tables: ``(meta, columns, data)``."""
    meta, cols, data = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        elif cols is None:
            cols = line.split(",")
        else:
            data.append([float(x) for x in line.split(",")])
    return meta, cols, np.array(data)


def config_fields() -> list:
    """Documented configuration keys with their defaults."""
    return [(k, _fmt_value(d)) for k, (_, d) in _SCHEMA.items()]


__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config_text", "write_table",
           "read_table", "csv_text", "config_fields", "FLOAT_FMT"]
