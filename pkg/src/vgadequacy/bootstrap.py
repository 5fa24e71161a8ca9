"""
Block bootstrap for adequacy statistics.

Two schemes:

``paired-blocks``
    normal and Christmas blocks of the paired (demand, wind) series are
    resampled with replacement within their kind, keeping demand and wind
    together (hindcast);
``independent-blocks``
    demand is resampled as above, while wind is resampled independently as
    one-week blocks with no special Christmas treatment (independence and
    rescaled models).

Replicate ``r`` draws from random streams keyed on ``(seed, r, stream)``
only, so replicate values do not depend on execution order or thread count.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DataError, NumericalError
from .ingest import CHRISTMAS, PairedSeries

PAIRED = "paired-blocks"
INDEPENDENT = "independent-blocks"
SCHEMES = (PAIRED, INDEPENDENT)

DEMAND_STREAM = 0
WIND_STREAM = 1

Statistic = Callable[[np.ndarray, np.ndarray], "float | np.ndarray"]


@dataclass(frozen=True)
class BootstrapSpec:
    n_replicates: int = 1000
    ci_level: float = 0.95
    seed: int = 0
    scheme: str = PAIRED

    def __post_init__(self):
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be >= 1")
        if not 0 < self.ci_level < 1:
            raise ValueError("ci_level must lie in (0, 1)")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    point_estimate: float
    replicates: np.ndarray
    ci_lo: float
    ci_hi: float
    level: float

    def summary(self, seed: int | None = None) -> dict:
        return {
            "point": self.point_estimate,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "level": self.level,
            "n_replicates": int(self.replicates.size),
            "seed": seed,
        }


class ReplicateError(NumericalError):
    """A statistic failed on one bootstrap replicate."""

    def __init__(self, replicate: int, cause: Exception):
        super().__init__(f"statistic failed on replicate {replicate}: {cause}")
        self.replicate = replicate


def replicate_rng(seed: int, replicate: int, stream: int = DEMAND_STREAM) -> np.random.Generator:
    """Generator for one replicate and stream; depends on nothing else."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(replicate, stream)))


@dataclass(frozen=True, eq=False)
class _Layout:
    blocks: list[slice]
    kinds: list[str]
    normal: np.ndarray
    xmas: np.ndarray

    @classmethod
    def of(cls, series: PairedSeries) -> "_Layout":
        runs = series.block_slices()
        kinds = [k for _, k in runs]
        is_x = np.array([k == CHRISTMAS for k in kinds], dtype=bool)
        return cls([s for s, _ in runs], kinds, np.flatnonzero(~is_x), np.flatnonzero(is_x))


def _draw(layout: _Layout, rng: np.random.Generator) -> np.ndarray:
    """Positions of the drawn blocks, filling the original slots kind for kind."""
    if layout.normal.size == 0 and layout.xmas.size == 0:
        raise DataError("series has no blocks to resample")
    pick_x = layout.xmas[rng.integers(0, layout.xmas.size, size=layout.xmas.size)] if layout.xmas.size else []
    pick_n = layout.normal[rng.integers(0, layout.normal.size, size=layout.normal.size)] if layout.normal.size else []
    it_x, it_n = iter(pick_x), iter(pick_n)
    return np.array([next(it_x) if kind == CHRISTMAS else next(it_n) for kind in layout.kinds], dtype=np.int64)


def _indices(pieces: list[slice]) -> np.ndarray:
    return np.concatenate([np.arange(s.start, s.stop) for s in pieces])


def paired_indices(series: PairedSeries, rng: np.random.Generator) -> np.ndarray:
    """Record indices of one paired-block resample."""
    layout = _Layout.of(series)
    return _indices([layout.blocks[i] for i in _draw(layout, rng)])


def _check_weeks(layout: _Layout, weeks: list[slice]):
    if len(weeks) != layout.normal.size + 2 * layout.xmas.size:
        raise DataError(
            f"block-count mismatch: {len(weeks)} wind weeks vs {layout.normal.size} normal"
            f" + {layout.xmas.size} two-week Christmas blocks"
        )


def independent_indices(series: PairedSeries, demand_rng: np.random.Generator,
                        wind_rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Demand and wind record indices of one independent-block resample."""
    layout = _Layout.of(series)
    weeks = series.week_slices()
    _check_weeks(layout, weeks)
    d_idx = _indices([layout.blocks[i] for i in _draw(layout, demand_rng)])
    picks = wind_rng.integers(0, len(weeks), size=len(weeks))
    return d_idx, _indices([weeks[i] for i in picks])


def _relabel(series: PairedSeries, idx: np.ndarray, pieces: list[slice]) -> PairedSeries:
    out = series.take(idx)
    lengths = np.array([s.stop - s.start for s in pieces])
    block_id = np.repeat(np.arange(lengths.size), lengths)
    starts = np.zeros(idx.size, dtype=bool)
    starts[np.cumsum(lengths)[:-1]] = True
    starts[0] = True
    week_change = np.concatenate(([True], out.week_id[1:] != out.week_id[:-1]))
    week_id = np.cumsum(starts | week_change) - 1
    return dataclasses.replace(out, block_id=block_id, week_id=week_id)


def resample_paired(series: PairedSeries, rng: np.random.Generator) -> PairedSeries:
    """One paired-block resample, block labels renumbered in output order."""
    layout = _Layout.of(series)
    pieces = [layout.blocks[i] for i in _draw(layout, rng)]
    return _relabel(series, _indices(pieces), pieces)


def resample_independent(series: PairedSeries, demand_rng: np.random.Generator,
                         wind_rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One independent-block resample as ``(demand_mw, wind_mw)`` arrays."""
    d_idx, w_idx = independent_indices(series, demand_rng, wind_rng)
    return series.demand_mw[d_idx], series.wind_mw[w_idx]


@dataclass(frozen=True, eq=False)
class ReplicateDraw:
    """Which original blocks replicate ``r`` uses.

    ``demand_counts[b]`` is how often block ``b`` (in ``block_slices`` order)
    was drawn; ``wind_counts[w]`` likewise for week ``w`` under the
    independent scheme, and ``None`` under the paired scheme.
    """

    demand_idx: np.ndarray
    wind_idx: np.ndarray
    demand_counts: np.ndarray
    wind_counts: np.ndarray | None


def replicate_draw(series: PairedSeries, spec: BootstrapSpec, r: int) -> ReplicateDraw:
    layout = _Layout.of(series)
    d_blocks = _draw(layout, replicate_rng(spec.seed, r, DEMAND_STREAM))
    d_idx = _indices([layout.blocks[i] for i in d_blocks])
    d_counts = np.bincount(d_blocks, minlength=len(layout.blocks))
    if spec.scheme == PAIRED:
        return ReplicateDraw(d_idx, d_idx, d_counts, None)
    weeks = series.week_slices()
    _check_weeks(layout, weeks)
    picks = replicate_rng(spec.seed, r, WIND_STREAM).integers(0, len(weeks), size=len(weeks))
    w_idx = _indices([weeks[i] for i in picks])
    return ReplicateDraw(d_idx, w_idx, d_counts, np.bincount(picks, minlength=len(weeks)))


def _replicate_data(series: PairedSeries, spec: BootstrapSpec, r: int) -> tuple[np.ndarray, np.ndarray]:
    draw = replicate_draw(series, spec, r)
    return series.demand_mw[draw.demand_idx], series.wind_mw[draw.wind_idx]


def bootstrap_replicates(statistic: Statistic, spec: BootstrapSpec, series: PairedSeries,
                         threads: int = 1) -> np.ndarray:
    """Statistic on every replicate; shape ``(R,)`` or ``(R, k)`` for vector statistics."""

    def one(r: int):
        demand, wind = _replicate_data(series, spec, r)
        try:
            return np.asarray(statistic(demand, wind), dtype=np.float64)
        except Exception as exc:
            raise ReplicateError(r, exc) from exc

    reps = range(spec.n_replicates)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, reps))
    else:
        values = [one(r) for r in reps]
    return np.stack(values)


def percentile_interval(replicates: np.ndarray, level: float) -> tuple[float, float]:
    """Percentile CI with linear interpolation between order statistics."""
    lo, hi = np.quantile(np.asarray(replicates, dtype=np.float64), [(1 - level) / 2, (1 + level) / 2], method="linear")
    return float(lo), float(hi)


def summarise(point: float, replicates: np.ndarray, level: float) -> BootstrapResult:
    lo, hi = percentile_interval(replicates, level)
    return BootstrapResult(float(point), np.asarray(replicates, dtype=np.float64), lo, hi, level)


def bootstrap_ci(statistic: Statistic, spec: BootstrapSpec, series: PairedSeries,
                 threads: int = 1) -> BootstrapResult:
    """Point estimate on the original series plus a percentile CI from the replicates."""
    point = np.asarray(statistic(series.demand_mw, series.wind_mw), dtype=np.float64)
    if point.ndim != 0:
        raise ValueError("bootstrap_ci needs a scalar statistic; use bootstrap_replicates for vectors")
    reps = bootstrap_replicates(statistic, spec, series, threads=threads)
    return summarise(float(point), reps, spec.ci_level)

