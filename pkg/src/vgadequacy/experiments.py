"""Scenario pipeline and the runs behind each CLI command."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import _kernels
from .bootstrap import INDEPENDENT, PAIRED, BootstrapResult, BootstrapSpec, ReplicateDraw, replicate_draw, summarise
from .capvalue import CapacityValueResult, efc_for_target, elcc
from .config import Config
from .distribution import DiscreteDistribution, GenUnit, build_copt, cdf, moments, read_units_csv, round_half_up
from .exceptions import DataError, NumericalError
from .ingest import (
    PairedSeries, SeasonSpec, add_response_adjustment, align_and_block, halfhourly_to_hourly, read_acs_csv,
    read_demand_csv, read_wind_csv, rescale_demand,
)
from .jointmodel import HINDCAST, JointModel, LoessRegressor, make_model
from .risk import fold, season_indices, top_n_curve


@dataclass(frozen=True, eq=False)
class Scenario:
    """Preprocessed inputs of one configured study; wind is held per unit installed."""

    config: Config
    series: PairedSeries
    units: list[GenUnit]
    copt: DiscreteDistribution
    demand_records: int
    wind_records: int

    @property
    def n_periods(self) -> float:
        given = self.config["scenario.n_periods"]
        if given is not None:
            return given
        return float(self.config["season.weeks_per_winter"] * self.series.periods_per_week)

    @property
    def tol_mw(self) -> float:
        return self.config["scenario.tol_mw"]

    def model(self, kind: str, installed_mw: float) -> JointModel:
        params = self.config.lambda_params if kind == "rescaled" else {}
        wind = self.series.with_installed(installed_mw).wind_mw
        return make_model(kind, **params).fit(self.series.demand_mw, wind)


def load_scenario(cfg: Config) -> Scenario:
    demand = read_demand_csv(cfg.path("data.demand_csv"))
    demand_records = len(demand)
    if cfg["data.demand_halfhourly"]:
        demand = halfhourly_to_hourly(demand)
    if cfg["data.acs_csv"] is not None:
        demand = rescale_demand(demand, read_acs_csv(cfg.path("data.acs_csv")), cfg["scenario.acs_target_mw"])
    demand = add_response_adjustment(demand, cfg["scenario.response_adjustment_mw"])
    wind = read_wind_csv(cfg.path("data.wind_csv"))
    spec = SeasonSpec(cfg["season.weeks_per_winter"], cfg["season.allow_gaps"])
    series = align_and_block(demand, wind, spec)
    units = read_units_csv(cfg.path("data.units_csv"))
    copt = build_copt(units, cfg["scenario.copt_step_mw"])
    return Scenario(cfg, series, units, copt, demand_records, len(wind))


def validation_report(sc: Scenario) -> dict:
    series = sc.series
    blocks = series.block_counts()
    weeks = len(series.week_slices())
    if weeks != blocks["normal"] + 2 * blocks["christmas"]:
        raise DataError(f"{weeks} weeks do not match {blocks['normal']} normal + {blocks['christmas']} Christmas blocks")
    winters = {}
    for w in dict.fromkeys(series.winter_id):
        mask = series.winter_id == w
        winters[str(w)] = {
            "records": int(mask.sum()),
            "weeks": int(np.unique(series.week_id[mask]).size),
            "christmas_block": bool(np.any(series.block_kind[mask] == "christmas")),
        }
    step = sc.copt.step_mw
    expected = math.fsum(round_half_up(u.capacity_mw / step) * step * u.availability for u in sc.units)
    mean, std = moments(sc.copt)
    if abs(mean - expected) > 1e-9 * max(1.0, abs(expected)):
        raise NumericalError(f"COPT mean {mean} differs from the unit-list expectation {expected}")
    return {
        "demand_records": sc.demand_records,
        "wind_records": sc.wind_records,
        "paired_records": len(series),
        "records_per_week": series.periods_per_week,
        "winters": winters,
        "blocks": {"normal": blocks["normal"], "christmas": blocks["christmas"], "wind_weeks": weeks},
        "units": {
            "count": len(sc.units),
            "installed_mw": math.fsum(u.capacity_mw for u in sc.units),
            "expected_available_mw": expected,
            "copt_mean_mw": mean,
            "copt_std_mw": std,
        },
        "n_periods": sc.n_periods,
        "status": "ok",
    }


def risk_record(sc: Scenario, kind: str, installed_mw: float, capvalue: bool = False) -> dict:
    model = sc.model(kind, installed_mw)
    record = {"installed_mw": installed_mw, **season_indices(sc.copt, model, sc.n_periods).to_record()}
    if capvalue:
        target = record["lolp"]
        record["efc"] = efc_for_target(sc.copt, model.demand_, target, model.max_wind_mw, sc.tol_mw,
                                       installed_mw).to_record()
        record["elcc"] = elcc(sc.copt, model, tol_mw=sc.tol_mw, installed_mw=installed_mw).to_record()
    return record


def _efc_at(sc: Scenario, model: JointModel, lolp_value: float, installed_mw: float) -> CapacityValueResult:
    return efc_for_target(sc.copt, model.demand_, lolp_value, model.max_wind_mw, sc.tol_mw, installed_mw)


# -- bootstrap via block sums ----------------------------------------------

class BlockRiskTable:
    """LOLP sums per resampling block, so a replicate's LOLP follows from its block counts.

    Paired scheme: ``sums[b]`` adds ``F_X(d_t - y_t)`` over the records of
    block ``b``.  Independent scheme: ``sums[b, w]`` adds
    ``F_X(d_t - lam_t y_s)`` over demand block ``b`` and wind week ``w``.
    Replicate LOLP is then the count-weighted sum divided by the replicate
    atom count, which equals refolding the resampled series.
    """

    def __init__(self, copt: DiscreteDistribution, model: JointModel, series: PairedSeries):
        block_starts = np.array([s.start for s, _ in series.block_slices()], dtype=np.int64)
        self.block_sizes = np.diff(np.append(block_starts, len(series))).astype(np.float64)
        self.paired = model.kind == HINDCAST
        if self.paired:
            f = cdf(copt, model.demand_ - model.wind_)
            self.sums = np.array([math.fsum(f[a:b]) for a, b in zip(block_starts, np.append(block_starts[1:], f.size))])
            self.week_sizes = None
        else:
            weeks = series.week_slices()
            week_starts = np.array([w.start for w in weeks] + [len(series)], dtype=np.int64)
            self.week_sizes = np.diff(week_starts).astype(np.float64)
            rows = _kernels.product_block_sums(model.demand_, model.scale_factors(), model.wind_, week_starts, copt)
            self.sums = np.add.reduceat(rows, block_starts, axis=0)

    def lolp(self, draw: ReplicateDraw) -> float:
        dc = draw.demand_counts.astype(np.float64)
        n_d = math.fsum(dc * self.block_sizes)
        if self.paired:
            return math.fsum(dc * self.sums) / n_d
        wc = draw.wind_counts.astype(np.float64)
        n_y = math.fsum(wc * self.week_sizes)
        return math.fsum((dc[:, None] * self.sums * wc[None, :]).ravel()) / (n_d * n_y)


def scheme_for(kind: str) -> str:
    return PAIRED if kind == HINDCAST else INDEPENDENT


def _map_replicates(fn, n: int, threads: int) -> np.ndarray:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.stack(list(pool.map(fn, range(n))))
    return np.stack([fn(r) for r in range(n)])


def bootstrap_capacities(sc: Scenario, kind: str, capacities: list[float], statistics: list[str],
                         spec: BootstrapSpec, threads: int = 1) -> np.ndarray:
    """Replicate values, shape ``(R, len(capacities), len(statistics))``.

    Every capacity is evaluated on the same resample of replicate ``r``.
    """
    models = [sc.model(kind, c) for c in capacities]
    tables = [BlockRiskTable(sc.copt, m, sc.series) for m in models]
    demand = sc.series.demand_mw
    lf = sc.series.load_factor

    def one(r: int) -> np.ndarray:
        draw = replicate_draw(sc.series, spec, r)
        out = np.empty((len(capacities), len(statistics)))
        d_rep = demand[draw.demand_idx]
        lf_max = float(lf[draw.wind_idx].max())
        for i, (cap, table) in enumerate(zip(capacities, tables)):
            p = table.lolp(draw)
            for j, stat in enumerate(statistics):
                if stat == "lole":
                    out[i, j] = p * sc.n_periods
                else:
                    out[i, j] = efc_for_target(sc.copt, d_rep, p, lf_max * cap, sc.tol_mw).value_mw
        return out

    return _map_replicates(one, spec.n_replicates, threads)


def bootstrap_spec(sc: Scenario, kind: str) -> BootstrapSpec:
    cfg = sc.config
    return BootstrapSpec(cfg["bootstrap.replicates"], cfg["bootstrap.level"], cfg["bootstrap.seed"], scheme_for(kind))


def point_values(sc: Scenario, kind: str, installed_mw: float, statistics: list[str]) -> list[float]:
    model = sc.model(kind, installed_mw)
    p = fold(sc.copt, model, want_epu=False)[0]
    values = []
    for stat in statistics:
        values.append(p * sc.n_periods if stat == "lole" else _efc_at(sc, model, p, installed_mw).value_mw)
    return values


def bootstrap_statistic(sc: Scenario, kind: str, installed_mw: float, statistic: str,
                        threads: int = 1) -> BootstrapResult:
    spec = bootstrap_spec(sc, kind)
    reps = bootstrap_capacities(sc, kind, [installed_mw], [statistic], spec, threads)[:, 0, 0]
    point = point_values(sc, kind, installed_mw, [statistic])[0]
    return summarise(point, reps, spec.ci_level)


def sweep_rows(sc: Scenario, kind: str, capacities: list[float], threads: int = 1) -> list[dict]:
    rows = []
    for cap in capacities:
        model = sc.model(kind, cap)
        p = fold(sc.copt, model, want_epu=False)[0]
        res = _efc_at(sc, model, p, cap)
        rows.append({
            "capacity_mw": cap,
            "lole_hours": p * sc.n_periods,
            "efc_mw": res.value_mw,
            "efc_pct": None if cap == 0 else round(res.value_pct_installed, 1),
        })
    cfg = sc.config
    if cfg["bootstrap.enabled"]:
        stats = cfg["bootstrap.statistics"]
        spec = bootstrap_spec(sc, kind)
        reps = bootstrap_capacities(sc, kind, capacities, stats, spec, threads)
        for i, row in enumerate(rows):
            for j, stat in enumerate(stats):
                point = row["lole_hours"] if stat == "lole" else row["efc_mw"]
                res = summarise(point, reps[:, i, j], spec.ci_level)
                row[f"{stat}_ci_lo"] = res.ci_lo
                row[f"{stat}_ci_hi"] = res.ci_hi
                row[f"{stat}_median"] = float(np.median(res.replicates))
    return rows


def topn_rows(sc: Scenario, capacities: list[float], n_max: int | None = None) -> list[dict]:
    rows = []
    for cap in capacities:
        curve = top_n_curve(sc.copt, sc.model(HINDCAST, cap), n_max)
        rows.extend({"capacity_mw": cap, "n": n, "share": float(s)} for n, s in enumerate(curve, start=1))
    return rows


def daily_peaks(sc: Scenario) -> tuple[np.ndarray, np.ndarray, pd.DatetimeIndex]:
    """Normalised demand and load factor at each day's demand peak.

    Demand is normalised by the target ACS peak after removing the response
    adjustment, which equals raw demand over that winter's own ACS peak.
    """
    s = sc.series
    cfg = sc.config
    norm = (s.demand_mw - cfg["scenario.response_adjustment_mw"]) / cfg["scenario.acs_target_mw"]
    days = s.timestamps.floor("D").asi8
    cuts = np.flatnonzero(days[1:] != days[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    stops = np.concatenate((cuts, [days.size]))
    peak = np.array([a + int(np.argmax(s.demand_mw[a:b])) for a, b in zip(starts, stops)], dtype=np.int64)
    return norm[peak], s.load_factor[peak], s.timestamps[peak]


def loess_rows(sc: Scenario, span: float, threshold: float, grid_points: int) -> list[dict]:
    x, y, ts = daily_peaks(sc)
    keep = x > threshold
    x, y, ts = x[keep], y[keep], ts[keep]
    if x.size < 10:
        raise DataError(f"only {x.size} daily peaks exceed normalised demand {threshold}; LOESS needs at least 10")
    reg = LoessRegressor(span=span, degree=1).fit(x, y)
    order = np.lexsort((ts.asi8, x))
    fitted = reg.predict(x[order])
    rows = [
        {"tag": "observation", "demand_norm": float(xv), "load_factor": float(yv), "loess_load_factor": float(fv)}
        for xv, yv, fv in zip(x[order], y[order], fitted)
    ]
    grid = np.linspace(x.min(), x.max(), grid_points)
    rows.extend(
        {"tag": "curve", "demand_norm": float(g), "load_factor": None, "loess_load_factor": float(f)}
        for g, f in zip(grid, reg.predict(grid))
    )
    return rows
