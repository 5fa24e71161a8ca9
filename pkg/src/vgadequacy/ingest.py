"""
Loading and preprocessing of demand and wind series.

Demand arrives per winter with its own average cold spell (ACS) peak; it is
rescaled to the scenario ACS, shifted by the frequency-response allowance and
inner-joined with the wind load-factor series.  The joined series is cut into
Sunday-to-Saturday weeks inside each winter's season window.  The week holding
Christmas Day and the week after it form one two-week block; every other week
is a one-week "normal" block.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from .exceptions import DataError

NORMAL = "normal"
CHRISTMAS = "christmas"

_WINTER_RE = re.compile(r"^\s*(\d{4})")


def _as_utc_index(timestamps) -> pd.DatetimeIndex:
    idx = pd.DatetimeIndex(timestamps)
    if idx.tz is None:
        idx = idx.tz_localize("UTC")
    else:
        idx = idx.tz_convert("UTC")
    return idx


def _check_increasing(idx: pd.DatetimeIndex, what: str):
    if idx.size > 1:
        steps = np.diff(idx.asi8)
        if np.any(steps <= 0):
            bad = int(np.flatnonzero(steps <= 0)[0]) + 1
            raise DataError(f"{what}: timestamps not strictly increasing at record {bad} ({idx[bad]})")


@dataclass(frozen=True, eq=False)
class DemandSeries:
    timestamps: pd.DatetimeIndex
    demand_mw: np.ndarray
    winter_id: np.ndarray

    def __post_init__(self):
        ts = _as_utc_index(self.timestamps)
        demand = np.asarray(self.demand_mw, dtype=np.float64)
        winters = np.asarray(self.winter_id, dtype=object)
        if not (ts.size == demand.size == winters.size):
            raise DataError("demand series fields differ in length")
        _check_increasing(ts, "demand")
        if not np.all(np.isfinite(demand)) or np.any(demand < 0):
            raise DataError("demand values must be finite and nonnegative")
        if any(w is None or (isinstance(w, float) and np.isnan(w)) or str(w) == "" for w in winters):
            raise DataError("every demand record needs a winter_id")
        winters = np.array([str(w) for w in winters], dtype=object)
        demand.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "demand_mw", demand)
        object.__setattr__(self, "winter_id", winters)

    def __len__(self):
        return self.demand_mw.size

    @property
    def winters(self) -> list[str]:
        """Winter labels in order of first appearance."""
        return list(dict.fromkeys(self.winter_id))


@dataclass(frozen=True, eq=False)
class WindSeries:
    timestamps: pd.DatetimeIndex
    load_factor: np.ndarray

    def __post_init__(self):
        ts = _as_utc_index(self.timestamps)
        lf = np.asarray(self.load_factor, dtype=np.float64)
        if ts.size != lf.size:
            raise DataError("wind series fields differ in length")
        _check_increasing(ts, "wind")
        if not np.all(np.isfinite(lf)) or np.any(lf < 0) or np.any(lf > 1):
            raise DataError("wind load factors must lie in [0, 1]")
        lf.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "load_factor", lf)

    def __len__(self):
        return self.load_factor.size


@dataclass(frozen=True)
class SeasonSpec:
    """Season window and block rules.

    The window opens on the first Sunday of November of the winter's first
    year and lasts ``weeks_per_winter`` weeks.  With ``allow_gaps`` set,
    incomplete weeks are dropped (a damaged Christmas week drops the whole
    two-week block) instead of raising.
    """

    weeks_per_winter: int = 20
    allow_gaps: bool = False

    def __post_init__(self):
        if int(self.weeks_per_winter) < 3:
            raise ValueError("weeks_per_winter must be at least 3")

    def season_start(self, winter_id: str) -> pd.Timestamp:
        m = _WINTER_RE.match(str(winter_id))
        if m is None:
            raise DataError(f"cannot read a start year from winter_id {winter_id!r}")
        year = int(m.group(1))
        nov1 = dt.date(year, 11, 1)
        # date.weekday(): Monday=0 .. Sunday=6
        first_sunday = nov1 + dt.timedelta(days=(6 - nov1.weekday()) % 7)
        return pd.Timestamp(first_sunday, tz="UTC")

    def christmas_week(self, winter_id: str) -> int | None:
        """Index of the first of the two Christmas weeks, or None if outside."""
        start = self.season_start(winter_id)
        xmas = pd.Timestamp(dt.date(start.year, 12, 25), tz="UTC")
        week = (xmas - start).days // 7
        if week < 0 or week + 1 >= self.weeks_per_winter:
            return None
        return week


@dataclass(frozen=True, eq=False)
class PairedSeries:
    """Coincident demand and wind records with resampling-block labels.

    Wind is held as a load factor together with an installed capacity, so the
    same blocked series can be evaluated across a capacity sweep.
    """

    timestamps: pd.DatetimeIndex
    demand_mw: np.ndarray
    load_factor: np.ndarray
    winter_id: np.ndarray
    block_id: np.ndarray
    block_kind: np.ndarray
    week_id: np.ndarray
    installed_mw: float = 1.0
    periods_per_week: int = 168

    def __post_init__(self):
        n = len(self.demand_mw)
        for name in ("load_factor", "winter_id", "block_id", "block_kind", "week_id"):
            if len(getattr(self, name)) != n:
                raise DataError(f"paired series field {name} has the wrong length")
        if len(self.timestamps) != n:
            raise DataError("paired series timestamps have the wrong length")
        if self.installed_mw < 0:
            raise DataError("installed capacity must be nonnegative")

    def __len__(self):
        return self.demand_mw.size

    @property
    def wind_mw(self) -> np.ndarray:
        return self.load_factor * self.installed_mw

    def with_installed(self, installed_mw: float) -> "PairedSeries":
        return _replace(self, installed_mw=float(installed_mw))

    def block_slices(self) -> list[tuple[slice, str]]:
        """Contiguous ``(slice, kind)`` runs of equal ``block_id``."""
        return _runs(self.block_id, self.block_kind)

    def week_slices(self) -> list[slice]:
        return [s for s, _ in _runs(self.week_id, np.full(len(self), NORMAL, dtype=object))]

    def block_counts(self) -> dict[str, int]:
        counts = {NORMAL: 0, CHRISTMAS: 0}
        for _, kind in self.block_slices():
            counts[kind] += 1
        return counts

    @property
    def n_winters(self) -> int:
        return len(dict.fromkeys(self.winter_id))

    def take(self, idx: np.ndarray) -> "PairedSeries":
        """Records at ``idx`` (no ordering requirement on the result)."""
        idx = np.asarray(idx, dtype=np.int64)
        return _replace(
            self,
            timestamps=self.timestamps[idx],
            demand_mw=self.demand_mw[idx],
            load_factor=self.load_factor[idx],
            winter_id=self.winter_id[idx],
            block_id=self.block_id[idx],
            block_kind=self.block_kind[idx],
            week_id=self.week_id[idx],
        )


def _replace(obj, **changes):
    return dataclasses.replace(obj, **changes)


def _runs(labels: np.ndarray, kinds: np.ndarray) -> list[tuple[slice, str]]:
    labels = np.asarray(labels)
    if labels.size == 0:
        return []
    cuts = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    stops = np.concatenate((cuts, [labels.size]))
    return [(slice(int(a), int(b)), str(kinds[a])) for a, b in zip(starts, stops)]


def halfhourly_to_hourly(series: DemandSeries) -> DemandSeries:
    """Collapse half-hourly demand to hourly by taking the larger half-hour."""
    n = len(series)
    if n % 2:
        raise DataError(f"half-hourly demand has an odd record count ({n})")
    ts = series.timestamps
    first, second = ts[0::2], ts[1::2]
    aligned = (first.minute == 0) & (first.second == 0) & ((second - first) == pd.Timedelta(minutes=30))
    if not np.all(aligned):
        bad = int(np.flatnonzero(~aligned)[0])
        raise DataError(f"half-hour pair {bad} is not aligned to a clock hour ({first[bad]})")
    pairs = series.demand_mw.reshape(-1, 2)
    return DemandSeries(first, pairs.max(axis=1), series.winter_id[0::2])


def rescale_demand(series: DemandSeries, acs_by_winter: Mapping[str, float], acs_target: float) -> DemandSeries:
    """Scale each winter by ``acs_target / acs_winter``."""
    if not acs_target > 0:
        raise DataError("target ACS peak must be positive")
    factors = {}
    for w in series.winters:
        if w not in acs_by_winter:
            raise DataError(f"no ACS peak given for winter {w!r}")
        acs = float(acs_by_winter[w])
        if not acs > 0:
            raise DataError(f"ACS peak for winter {w!r} must be positive, got {acs}")
        factors[w] = acs_target / acs
    scale = np.array([factors[w] for w in series.winter_id])
    return DemandSeries(series.timestamps, series.demand_mw * scale, series.winter_id)


def add_response_adjustment(series: DemandSeries, adj_mw: float = 700.0) -> DemandSeries:
    if adj_mw < 0:
        raise DataError("response adjustment must be nonnegative")
    return DemandSeries(series.timestamps, series.demand_mw + adj_mw, series.winter_id)


def wind_to_capacity(series: WindSeries, installed_mw: float) -> np.ndarray:
    """Hourly available wind in MW for a given installed capacity."""
    if installed_mw < 0:
        raise DataError("installed capacity must be nonnegative")
    return series.load_factor * float(installed_mw)


def _cadence(ts: pd.DatetimeIndex) -> pd.Timedelta:
    if ts.size < 2:
        raise DataError("need at least two records to infer the time step")
    return pd.Timedelta(int(np.median(np.diff(ts.asi8))), unit="ns")


def align_and_block(demand: DemandSeries, wind: WindSeries, spec: SeasonSpec = SeasonSpec()) -> PairedSeries:
    """Join demand and wind on timestamps inside each season window and label blocks."""
    step = _cadence(demand.timestamps)
    week = pd.Timedelta(days=7)
    if week % step != pd.Timedelta(0):
        raise DataError(f"time step {step} does not divide a week")
    per_week = int(week / step)

    common, d_idx, w_idx = np.intersect1d(
        demand.timestamps.asi8, wind.timestamps.asi8, assume_unique=True, return_indices=True
    )
    d_idx = d_idx.astype(np.int64)
    w_idx = w_idx.astype(np.int64)
    joined_ts = common  # int64 ns, sorted
    joined_winter = demand.winter_id[d_idx]

    keep_d, keep_w = [], []
    block_id, block_kind, week_id, winter_out = [], [], [], []
    next_block = next_week = 0
    for winter in demand.winters:
        start = spec.season_start(winter)
        mask = joined_winter == winter
        ts_w = joined_ts[mask]
        rel_weeks = (ts_w - start.value) // week.value
        inside = (rel_weeks >= 0) & (rel_weeks < spec.weeks_per_winter)
        if not np.any(inside):
            raise DataError(f"winter {winter!r} has no coincident demand and wind data inside its season window")
        sel_d = d_idx[mask][inside]
        sel_w = w_idx[mask][inside]
        rel_weeks = rel_weeks[inside]
        counts = np.bincount(rel_weeks, minlength=spec.weeks_per_winter)
        complete = counts == per_week
        xmas = spec.christmas_week(winter)
        if not np.all(complete):
            if not spec.allow_gaps:
                bad = int(np.flatnonzero(~complete)[0])
                wk_start = start + bad * week
                raise DataError(
                    f"winter {winter!r}: week starting {wk_start.date()} has {counts[bad]} of {per_week} records"
                )
            if xmas is not None and not (complete[xmas] and complete[xmas + 1]):
                complete[xmas] = complete[xmas + 1] = False
        for k in range(spec.weeks_per_winter):
            if not complete[k]:
                continue
            rows = rel_weeks == k
            keep_d.append(sel_d[rows])
            keep_w.append(sel_w[rows])
            n_rows = int(rows.sum())
            if xmas is not None and k == xmas + 1:
                block = next_block - 1
                kind = CHRISTMAS
            else:
                block = next_block
                next_block += 1
                kind = CHRISTMAS if (xmas is not None and k == xmas) else NORMAL
            block_id.append(np.full(n_rows, block, dtype=np.int64))
            block_kind.append(np.full(n_rows, kind, dtype=object))
            week_id.append(np.full(n_rows, next_week, dtype=np.int64))
            winter_out.append(np.full(n_rows, winter, dtype=object))
            next_week += 1
    if not keep_d:
        raise DataError("no complete weeks remain after alignment")

    di = np.concatenate(keep_d)
    wi = np.concatenate(keep_w)
    ts = demand.timestamps[di]
    _check_increasing(ts, "aligned series")
    return PairedSeries(
        timestamps=ts,
        demand_mw=demand.demand_mw[di],
        load_factor=wind.load_factor[wi],
        winter_id=np.concatenate(winter_out),
        block_id=np.concatenate(block_id),
        block_kind=np.concatenate(block_kind),
        week_id=np.concatenate(week_id),
        installed_mw=1.0,
        periods_per_week=per_week,
    )


# -- CSV readers ------------------------------------------------------------

def _read_csv(path, required: set[str], **kwargs) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, encoding="utf-8", float_precision="round_trip", **kwargs)
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: file is empty") from None
    missing = required - set(frame.columns)
    if missing:
        raise DataError(f"{path}: missing columns {sorted(missing)}")
    if frame.empty:
        raise DataError(f"{path}: no data rows")
    return frame


def _numeric(frame: pd.DataFrame, col: str, path) -> np.ndarray:
    values = pd.to_numeric(frame[col], errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise DataError(f"{path}:{bad[0] + 2}: column {col} is not a finite number")
    return values


def _timestamps(frame: pd.DataFrame, path) -> pd.DatetimeIndex:
    try:
        return pd.DatetimeIndex(pd.to_datetime(frame["timestamp"], utc=True, format="ISO8601"))
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: bad timestamp ({exc})") from None


def read_demand_csv(path: str | Path) -> DemandSeries:
    """Read ``timestamp,demand_mw,winter_id``."""
    frame = _read_csv(path, {"timestamp", "demand_mw", "winter_id"}, dtype={"winter_id": str})
    demand = _numeric(frame, "demand_mw", path)
    neg = np.flatnonzero(demand < 0)
    if neg.size:
        raise DataError(f"{path}:{neg[0] + 2}: negative demand")
    try:
        return DemandSeries(_timestamps(frame, path), demand, frame["winter_id"].to_numpy(dtype=object))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def read_wind_csv(path: str | Path) -> WindSeries:
    """Read ``timestamp,load_factor``."""
    frame = _read_csv(path, {"timestamp", "load_factor"})
    lf = _numeric(frame, "load_factor", path)
    bad = np.flatnonzero((lf < 0) | (lf > 1))
    if bad.size:
        raise DataError(f"{path}:{bad[0] + 2}: load factor outside [0, 1]")
    try:
        return WindSeries(_timestamps(frame, path), lf)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def read_acs_csv(path: str | Path) -> dict[str, float]:
    """Read ``winter_id,acs_peak_mw`` into a mapping."""
    frame = _read_csv(path, {"winter_id", "acs_peak_mw"}, dtype={"winter_id": str})
    values = _numeric(frame, "acs_peak_mw", path)
    out = {}
    for line, (w, v) in enumerate(zip(frame["winter_id"], values), start=2):
        if w in out:
            raise DataError(f"{path}:{line}: duplicate winter {w!r}")
        out[str(w)] = float(v)
    return out


def write_demand_csv(series: DemandSeries, path: str | Path):
    pd.DataFrame({
        "timestamp": series.timestamps.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "demand_mw": series.demand_mw,
        "winter_id": series.winter_id,
    }).to_csv(path, index=False)


def write_wind_csv(series: WindSeries, path: str | Path):
    pd.DataFrame({
        "timestamp": series.timestamps.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "load_factor": series.load_factor,
    }).to_csv(path, index=False)
