"""
Scenario configuration.

A YAML file whose keys may be nested sections or flat dotted keys
(``lambda.l2: 0.5`` and ``lambda: {l2: 0.5}`` are equivalent).  Relative
file paths are resolved against the directory holding the config file.

Schema (defaults in brackets)::

    data.demand_csv            timestamp,demand_mw,winter_id
    data.wind_csv              timestamp,load_factor
    data.units_csv             name,capacity_mw,availability
    data.acs_csv               winter_id,acs_peak_mw [none: no rescaling]
    data.demand_halfhourly     collapse half-hours by max [false]
    scenario.acs_target_mw     [55550]
    scenario.response_adjustment_mw  [700]
    scenario.installed_wind_mw scalar or list [[0]]
    scenario.model             hindcast | independence | rescaled [hindcast]
    scenario.copt_step_mw      [1.0]
    scenario.n_periods         [weeks_per_winter x records per week]
    scenario.tol_mw            EFC/ELCC bisection tolerance [0.1]
    lambda.d1_norm, lambda.d2_norm, lambda.l1, lambda.l2   [0.95, 1.03, 1.0, 0.5]
    lambda.acs_ref_mw          [scenario.acs_target_mw]
    season.weeks_per_winter    [20]
    season.allow_gaps          [false]
    bootstrap.enabled          [false]
    bootstrap.replicates       [1000]
    bootstrap.level            [0.95]
    bootstrap.seed             [0]
    bootstrap.statistics       subset of [lole, efc] [[lole]]
    loess.span                 [0.75]
    loess.demand_threshold     [0.9]
    loess.grid_points          [101]
    topn.n_max                 [all hours]
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .exceptions import ConfigError
from .jointmodel import MODEL_KINDS

DEFAULTS: dict[str, Any] = {
    "data.demand_csv": None,
    "data.wind_csv": None,
    "data.units_csv": None,
    "data.acs_csv": None,
    "data.demand_halfhourly": False,
    "scenario.acs_target_mw": 55550.0,
    "scenario.response_adjustment_mw": 700.0,
    "scenario.installed_wind_mw": [0.0],
    "scenario.model": "hindcast",
    "scenario.copt_step_mw": 1.0,
    "scenario.n_periods": None,
    "scenario.tol_mw": 0.1,
    "lambda.d1_norm": 0.95,
    "lambda.d2_norm": 1.03,
    "lambda.l1": 1.0,
    "lambda.l2": 0.5,
    "lambda.acs_ref_mw": None,
    "season.weeks_per_winter": 20,
    "season.allow_gaps": False,
    "bootstrap.enabled": False,
    "bootstrap.replicates": 1000,
    "bootstrap.level": 0.95,
    "bootstrap.seed": 0,
    "bootstrap.statistics": ["lole"],
    "loess.span": 0.75,
    "loess.demand_threshold": 0.9,
    "loess.grid_points": 101,
    "topn.n_max": None,
}

PATH_KEYS = ("data.demand_csv", "data.wind_csv", "data.units_csv", "data.acs_csv")
REQUIRED = ("data.demand_csv", "data.wind_csv", "data.units_csv")
BOOTSTRAP_STATISTICS = ("lole", "efc")


def flatten(tree: dict, prefix: str = "") -> dict[str, Any]:
    """Nested mapping to ``{dotted.key: value}``."""
    out: dict[str, Any] = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            if name in out:
                raise ConfigError(f"key {name!r} given twice")
            out[name] = value
    return out


@dataclass(frozen=True)
class Config:
    values: dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def __getitem__(self, key: str):
        return self.values[key]

    def path(self, key: str) -> Path | None:
        value = self.values[key]
        return None if value is None else Path(value)

    def with_overrides(self, **dotted) -> "Config":
        """Copy with dotted keys replaced (``None`` values are ignored)."""
        values = dict(self.values)
        for key, value in dotted.items():
            if value is None:
                continue
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value
        return _validated(dataclasses.replace(self, values=values))

    @property
    def capacities(self) -> list[float]:
        return list(self.values["scenario.installed_wind_mw"])

    @property
    def lambda_params(self) -> dict[str, float]:
        ref = self.values["lambda.acs_ref_mw"]
        return {
            "d1_norm": self.values["lambda.d1_norm"],
            "d2_norm": self.values["lambda.d2_norm"],
            "l1": self.values["lambda.l1"],
            "l2": self.values["lambda.l2"],
            "acs_ref_mw": self.values["scenario.acs_target_mw"] if ref is None else ref,
        }


def _as_float(key: str, value, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None
    if out != out or out in (float("inf"), float("-inf")):
        raise ConfigError(f"{key} must be finite")
    if positive and not out > 0:
        raise ConfigError(f"{key} must be positive, got {out}")
    if nonneg and out < 0:
        raise ConfigError(f"{key} must be nonnegative, got {out}")
    return out


def _as_int(key: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{key} must be at least {minimum}, got {value}")
    return int(value)


def _as_bool(key: str, value) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be true or false, got {value!r}")
    return value


def _validated(cfg: Config) -> Config:
    v = dict(cfg.values)
    for key in ("data.demand_halfhourly", "season.allow_gaps", "bootstrap.enabled"):
        v[key] = _as_bool(key, v[key])
    v["scenario.acs_target_mw"] = _as_float("scenario.acs_target_mw", v["scenario.acs_target_mw"], positive=True)
    v["scenario.response_adjustment_mw"] = _as_float(
        "scenario.response_adjustment_mw", v["scenario.response_adjustment_mw"], nonneg=True)
    caps = v["scenario.installed_wind_mw"]
    if not isinstance(caps, (list, tuple)):
        caps = [caps]
    if not caps:
        raise ConfigError("scenario.installed_wind_mw must not be empty")
    v["scenario.installed_wind_mw"] = [_as_float("scenario.installed_wind_mw", c, nonneg=True) for c in caps]
    if v["scenario.model"] not in MODEL_KINDS:
        raise ConfigError(f"scenario.model must be one of {', '.join(MODEL_KINDS)}, got {v['scenario.model']!r}")
    v["scenario.copt_step_mw"] = _as_float("scenario.copt_step_mw", v["scenario.copt_step_mw"], positive=True)
    if v["scenario.n_periods"] is not None:
        v["scenario.n_periods"] = _as_float("scenario.n_periods", v["scenario.n_periods"], positive=True)
    v["scenario.tol_mw"] = _as_float("scenario.tol_mw", v["scenario.tol_mw"], positive=True)
    for key in ("lambda.d1_norm", "lambda.d2_norm", "lambda.l1", "lambda.l2"):
        v[key] = _as_float(key, v[key])
    if not v["lambda.d1_norm"] < v["lambda.d2_norm"]:
        raise ConfigError("lambda.d1_norm must be below lambda.d2_norm")
    if not 0 < v["lambda.l2"] <= v["lambda.l1"] <= 1:
        raise ConfigError("lambda factors must satisfy 0 < l2 <= l1 <= 1")
    if v["lambda.acs_ref_mw"] is not None:
        v["lambda.acs_ref_mw"] = _as_float("lambda.acs_ref_mw", v["lambda.acs_ref_mw"], positive=True)
    v["season.weeks_per_winter"] = _as_int("season.weeks_per_winter", v["season.weeks_per_winter"], 3)
    v["bootstrap.replicates"] = _as_int("bootstrap.replicates", v["bootstrap.replicates"], 1)
    v["bootstrap.level"] = _as_float("bootstrap.level", v["bootstrap.level"])
    if not 0 < v["bootstrap.level"] < 1:
        raise ConfigError("bootstrap.level must lie in (0, 1)")
    v["bootstrap.seed"] = _as_int("bootstrap.seed", v["bootstrap.seed"], 0)
    stats = v["bootstrap.statistics"]
    if isinstance(stats, str):
        stats = [stats]
    if not stats or any(s not in BOOTSTRAP_STATISTICS for s in stats):
        raise ConfigError(f"bootstrap.statistics must be a nonempty subset of {list(BOOTSTRAP_STATISTICS)}")
    v["bootstrap.statistics"] = [s for s in BOOTSTRAP_STATISTICS if s in stats]
    v["loess.span"] = _as_float("loess.span", v["loess.span"], positive=True)
    if v["loess.span"] > 1:
        raise ConfigError("loess.span must lie in (0, 1]")
    v["loess.demand_threshold"] = _as_float("loess.demand_threshold", v["loess.demand_threshold"])
    v["loess.grid_points"] = _as_int("loess.grid_points", v["loess.grid_points"], 2)
    if v["topn.n_max"] is not None:
        v["topn.n_max"] = _as_int("topn.n_max", v["topn.n_max"], 1)
    return dataclasses.replace(cfg, values=v)


def from_mapping(tree: dict, base_dir: str | Path = ".") -> Config:
    flat = flatten(tree)
    unknown = sorted(set(flat) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    values = {**DEFAULTS, **flat}
    base = Path(base_dir)
    for key in PATH_KEYS:
        if values[key] is not None:
            p = Path(str(values[key]))
            values[key] = str(p if p.is_absolute() else base / p)
    return _validated(Config(values, base))


def load_config(path: str | Path, require_data: bool = True) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        tree = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    if not isinstance(tree, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    try:
        cfg = from_mapping(tree, path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if require_data:
        missing = [k for k in REQUIRED if cfg[k] is None]
        if missing:
            raise ConfigError(f"{path}: missing required key(s): {', '.join(missing)}")
        for key in PATH_KEYS:
            p = cfg.path(key)
            if p is not None and not p.is_file():
                raise ConfigError(f"{path}: {key} points to a missing file {p}")
    return cfg
