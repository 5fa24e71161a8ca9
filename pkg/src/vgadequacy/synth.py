"""
Synthetic GB-like fixture.

Everything here is invented: a seeded generator producing winter demand,
wind load factors, per-winter ACS peaks and a conventional fleet whose
magnitudes resemble a large island system (ACS peak 55.55 GW, expected
available conventional capacity about 58.8 GW with a standard deviation near
2 GW).  Extreme demand is confined to a few cold-spell episodes during which
wind is also weak, so the joint tail is sparse.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .distribution import GenUnit, write_units_csv
from .ingest import DemandSeries, SeasonSpec, WindSeries, write_demand_csv, write_wind_csv

TARGET_COPT_MEAN_MW = 58820.0

# (kind, count, capacity MW, availability, capacity jitter MW)
FLEET = (
    ("nuclear", 14, 1100.0, 0.84, 60.0),
    ("coal", 40, 480.0, 0.88, 60.0),
    ("ccgt", 70, 400.0, 0.90, 60.0),
    ("ocgt", 40, 110.0, 0.92, 20.0),
    ("hydro", 30, 70.0, 0.95, 20.0),
    ("interconnector", 4, 1000.0, 0.97, 0.0),
)


@dataclass(frozen=True)
class ColdSpell:
    winter_id: str
    start: dt.date
    days: float
    demand_boost: float = 0.07   # added to normalised demand at the episode centre
    wind_drop: float = 2.5       # subtracted from the latent wind state at the centre


DEFAULT_SPELLS = (
    ColdSpell("2008-09", dt.date(2009, 1, 4), 5.0),
    ColdSpell("2009-10", dt.date(2010, 1, 5), 6.0),
    ColdSpell("2010-11", dt.date(2010, 12, 1), 5.0),
)


@dataclass(frozen=True)
class FixtureSpec:
    first_winter: int = 2005
    n_winters: int = 7
    weeks_per_winter: int = 20
    cadence_hours: int = 1
    margin_days: int = 2
    acs_target_mw: float = 55550.0
    acs_mean_mw: float = 57000.0
    acs_sd_mw: float = 1500.0
    peak_level: float = 0.95
    weather_sd: float = 0.022
    wind_persistence_hours: float = 60.0
    wind_offset: float = -0.2
    wind_spread: float = 1.5
    wind_seasonal: float = 1.0
    cut_in: float = 0.15
    weather_calm: float = 0.0
    cold_spells: tuple[ColdSpell, ...] = field(default=DEFAULT_SPELLS)

    def winter_ids(self) -> list[str]:
        return [f"{y}-{(y + 1) % 100:02d}" for y in range(self.first_winter, self.first_winter + self.n_winters)]


def fleet_units(target_mean_mw: float = TARGET_COPT_MEAN_MW, seed: int = 100) -> list[GenUnit]:
    """Conventional fleet scaled so its expected available capacity is near ``target_mean_mw``."""
    raw = []
    for i, (kind, n, cap, avail, jitter) in enumerate(FLEET):
        rng = np.random.default_rng(seed + i)
        caps = cap + rng.uniform(-jitter, jitter, n)
        avails = np.round(np.clip(avail + rng.uniform(-0.03, 0.03, n), 0.0, 1.0), 3)
        raw.extend((f"{kind}_{j + 1:02d}", c, a) for j, (c, a) in enumerate(zip(caps, avails)))
    scale = target_mean_mw / math.fsum(c * a for _, c, a in raw)
    return [GenUnit(name, float(round(c * scale)), float(a)) for name, c, a in raw]


def _diurnal_raw(hour):
    base = 0.62 + 0.22 * np.clip(np.sin(np.pi * (hour - 5.0) / 14.0), 0.0, None)
    return base + 0.16 * np.exp(-0.5 * ((hour - 17.5) / 1.6) ** 2)


_DIURNAL_PEAK = float(_diurnal_raw(np.linspace(0.0, 24.0, 2401)).max())


def _diurnal(hour: np.ndarray) -> np.ndarray:
    """Demand shape over the day, peaking at 1.0 in the early evening."""
    return _diurnal_raw(hour) / _DIURNAL_PEAK


def _spell_profile(ts: pd.DatetimeIndex, spell: ColdSpell) -> np.ndarray:
    start = pd.Timestamp(spell.start, tz="UTC")
    u = (ts - start) / pd.Timedelta(days=spell.days)
    u = np.asarray(u, dtype=np.float64)
    return np.where((u > 0) & (u < 1), np.sin(np.pi * np.clip(u, 0, 1)) ** 2, 0.0)


def winter_records(spec: FixtureSpec, winter_id: str, rng: np.random.Generator):
    season = SeasonSpec(spec.weeks_per_winter)
    start = season.season_start(winter_id) - pd.Timedelta(days=spec.margin_days)
    days = spec.weeks_per_winter * 7 + 2 * spec.margin_days
    ts = pd.date_range(start, periods=days * 24 // spec.cadence_hours, freq=f"{spec.cadence_hours}h")
    hour = ts.hour.to_numpy() + ts.minute.to_numpy() / 60.0
    day = np.asarray((ts - ts[0]) / pd.Timedelta(days=1), dtype=np.float64)

    seasonal = 0.95 + 0.05 * np.sin(np.pi * np.clip(day / days, 0, 1))
    weekend = np.where(ts.dayofweek >= 5, 0.92, 1.0)
    md = ts.month * 100 + ts.day
    holiday = np.where((md >= 1224) | (md <= 101), 0.88, 1.0)

    # Daily weather anomaly, AR(1) across days, interpolated to records.
    n_days = int(math.ceil(day[-1])) + 2
    anomaly = np.empty(n_days)
    anomaly[0] = rng.normal()
    for k in range(1, n_days):
        anomaly[k] = 0.75 * anomaly[k - 1] + math.sqrt(1 - 0.75**2) * rng.normal()
    weather = np.interp(day, np.arange(n_days), anomaly)

    for sp in spec.cold_spells:
        if sp.winter_id == winter_id:
            prof = _spell_profile(ts, sp)
            weather = (1 - prof) * weather + prof * 1.5  # a cold spell is a cold anomaly
    demand_norm = spec.peak_level * _diurnal(hour) * seasonal * weekend * holiday * (1 + spec.weather_sd * weather)
    demand_norm *= 1 + 0.004 * rng.normal(size=ts.size)

    phi = math.exp(-spec.cadence_hours / spec.wind_persistence_hours)
    latent = np.empty(ts.size)
    latent[0] = rng.normal()
    shocks = rng.normal(size=ts.size) * math.sqrt(1 - phi**2)
    for k in range(1, ts.size):
        latent[k] = phi * latent[k - 1] + shocks[k]
    latent -= spec.weather_calm * weather  # optional calm-cold coupling outside the spells
    # Windier mid-winter, calmer shoulder months.
    latent += spec.wind_seasonal * (np.sin(np.pi * np.clip(day / days, 0, 1)) - 2 / np.pi)

    for sp in spec.cold_spells:
        if sp.winter_id == winter_id:
            prof = _spell_profile(ts, sp)
            demand_norm = demand_norm + sp.demand_boost * prof * _diurnal(hour)
            latent = latent - sp.wind_drop * prof
    load_factor = 1.0 / (1.0 + np.exp(-(spec.wind_offset + spec.wind_spread * latent)))
    # Below cut-in the fleet produces nothing.
    load_factor = np.clip(load_factor - spec.cut_in, 0.0, None) / (1.0 - spec.cut_in)
    return ts, demand_norm, np.round(load_factor, 6)


@dataclass(frozen=True, eq=False)
class Fixture:
    demand: DemandSeries
    wind: WindSeries
    acs_by_winter: dict[str, float]
    units: list[GenUnit]
    spec: FixtureSpec


def make_fixture(spec: FixtureSpec = FixtureSpec(), seed: int = 0) -> Fixture:
    ss = np.random.SeedSequence(seed)
    ts_all, demand_all, winter_all, lf_all = [], [], [], []
    acs = {}
    for winter_id, child in zip(spec.winter_ids(), ss.spawn(spec.n_winters)):
        rng = np.random.default_rng(child)
        acs[winter_id] = float(round(spec.acs_mean_mw + spec.acs_sd_mw * rng.normal()))
        ts, norm, lf = winter_records(spec, winter_id, rng)
        ts_all.append(ts)
        demand_all.append(np.round(norm * acs[winter_id], 1))
        winter_all.append(np.full(ts.size, winter_id, dtype=object))
        lf_all.append(lf)
    ts = ts_all[0].append(ts_all[1:]) if len(ts_all) > 1 else ts_all[0]
    demand = DemandSeries(ts, np.concatenate(demand_all), np.concatenate(winter_all))
    wind = WindSeries(ts, np.concatenate(lf_all))
    return Fixture(demand, wind, acs, fleet_units(), spec)


def write_fixture(out_dir: str | Path, spec: FixtureSpec = FixtureSpec(), seed: int = 0,
                  capacities: list[float] | None = None) -> Path:
    """Write demand, wind, ACS and unit CSVs plus a ready-to-run config; returns the config path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fx = make_fixture(spec, seed)
    write_demand_csv(fx.demand, out / "demand.csv")
    write_wind_csv(fx.wind, out / "wind.csv")
    pd.DataFrame({"winter_id": list(fx.acs_by_winter), "acs_peak_mw": list(fx.acs_by_winter.values())}).to_csv(
        out / "acs.csv", index=False)
    write_units_csv(fx.units, out / "units.csv")
    caps = capacities if capacities is not None else [float(c) for c in range(0, 30001, 5000)]
    config = {
        "data": {"demand_csv": "demand.csv", "wind_csv": "wind.csv", "acs_csv": "acs.csv", "units_csv": "units.csv"},
        "scenario": {
            "acs_target_mw": spec.acs_target_mw,
            "response_adjustment_mw": 700.0,
            "installed_wind_mw": caps,
            "model": "hindcast",
        },
        "season": {"weeks_per_winter": spec.weeks_per_winter},
        "bootstrap": {"enabled": False, "replicates": 1000, "level": 0.95, "seed": seed},
    }
    path = out / "config.yaml"
    header = f"# SYNTHETIC fixture written by 'vgadequacy synth' (seed {seed}); not real system data.\n"
    path.write_text(header + yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    return path
