"""
Exact discrete distributions on a uniform MW grid.

The main use is the capacity outage probability table (COPT): the
distribution of available conventional capacity obtained by convolving
independent two-state generating units.  All operations are exact up to
floating point rounding; nothing is renormalised and small tail masses are
never dropped, because the lower tail of available capacity is what drives
loss-of-load risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .exceptions import DataError, NumericalError

MASS_TOL = 1e-9
# Grid lookups floor (x - origin) / step; this slack keeps values that sit on
# an atom up to rounding noise on the closed side of the inequality.
GRID_EPS = 1e-9


@dataclass(frozen=True)
class GenUnit:
    """A conventional unit that is either fully available or fully out."""

    name: str
    capacity_mw: float
    availability: float

    def __post_init__(self):
        if not math.isfinite(self.capacity_mw) or self.capacity_mw < 0:
            raise DataError(f"unit {self.name!r}: capacity must be finite and >= 0, got {self.capacity_mw}")
        if not math.isfinite(self.availability) or not 0.0 <= self.availability <= 1.0:
            raise DataError(f"unit {self.name!r}: availability must lie in [0, 1], got {self.availability}")


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability mass on the grid ``origin_mw + k * step_mw``, k = 0..len(probs)-1.

    The support is trimmed: first and last entries of ``probs`` are nonzero.
    Instances are immutable; ``probs`` is stored as a read-only array.
    """

    origin_mw: float
    step_mw: float
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64, copy=True).ravel()
        if not (math.isfinite(self.step_mw) and self.step_mw > 0):
            raise ValueError(f"step_mw must be positive and finite, got {self.step_mw}")
        if not math.isfinite(self.origin_mw):
            raise ValueError("origin_mw must be finite")
        if probs.size == 0:
            raise ValueError("empty distribution")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probabilities must be finite and nonnegative")
        if probs[0] == 0 or probs[-1] == 0:
            raise ValueError("support must be trimmed (first and last mass nonzero)")
        total = math.fsum(probs)
        if abs(total - 1.0) > MASS_TOL:
            raise NumericalError(f"probability mass {total!r} differs from 1 by more than {MASS_TOL}")
        probs.flags.writeable = False
        object.__setattr__(self, "origin_mw", float(self.origin_mw))
        object.__setattr__(self, "step_mw", float(self.step_mw))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_atoms(cls, atoms: dict[float, float], step_mw: float = 1.0) -> "DiscreteDistribution":
        """Build from ``{value: probability}``; values must sit on a common grid."""
        if not atoms:
            raise ValueError("no atoms given")
        values = np.array(sorted(atoms), dtype=np.float64)
        origin = values[0]
        idx = np.rint((values - origin) / step_mw).astype(np.int64)
        if not np.allclose(origin + idx * step_mw, values, rtol=0, atol=1e-9 * step_mw):
            raise ValueError("atom values are not on the grid")
        probs = np.zeros(idx[-1] + 1)
        for i, v in zip(idx, values):
            probs[i] += atoms[float(v)]
        return _trimmed(origin, step_mw, probs)

    @classmethod
    def point_mass(cls, value_mw: float, step_mw: float = 1.0) -> "DiscreteDistribution":
        return cls(value_mw, step_mw, np.ones(1))

    def __len__(self):
        return self.probs.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return (
            self.origin_mw == other.origin_mw
            and self.step_mw == other.step_mw
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    @property
    def support(self) -> np.ndarray:
        return self.origin_mw + self.step_mw * np.arange(self.probs.size)

    @property
    def max_mw(self) -> float:
        return self.origin_mw + self.step_mw * (self.probs.size - 1)

    def to_dict(self) -> dict[float, float]:
        """Nonzero atoms as ``{value: probability}``."""
        nz = np.flatnonzero(self.probs)
        return {float(self.origin_mw + self.step_mw * k): float(self.probs[k]) for k in nz}

    @cached_property
    def cum_probs(self) -> np.ndarray:
        """Cumulative masses, with the final entry pinned to exactly 1."""
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        cum.flags.writeable = False
        return cum

    @cached_property
    def cum_index_moment(self) -> np.ndarray:
        """Running sums of ``k * p_k``; used by the closed-form shortfall."""
        cum = np.cumsum(np.arange(self.probs.size) * self.probs)
        cum.flags.writeable = False
        return cum

    def grid_index(self, x) -> np.ndarray:
        """Index of the last grid point at or below ``x`` (may be <0 or >= len)."""
        k = np.floor((np.asarray(x, dtype=np.float64) - self.origin_mw) / self.step_mw + GRID_EPS)
        # Clip far-out points before the integer cast; only k < 0 and k >= len matter there.
        return np.clip(k, -1, self.probs.size).astype(np.int64)


def _trimmed(origin: float, step: float, probs: np.ndarray) -> DiscreteDistribution:
    nz = np.flatnonzero(probs)
    if nz.size == 0:
        raise NumericalError("distribution has no positive mass")
    lo, hi = nz[0], nz[-1]
    return DiscreteDistribution(origin + lo * step, step, probs[lo:hi + 1])


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def build_copt(units: Sequence[GenUnit], step_mw: float = 1.0) -> DiscreteDistribution:
    """Capacity outage probability table for independent two-state units.

    Each capacity is rounded half-up to a multiple of ``step_mw``; units are
    then folded in one at a time by direct accumulation.
    """
    if not units:
        raise DataError("unit list is empty")
    if not (math.isfinite(step_mw) and step_mw > 0):
        raise ValueError(f"step_mw must be positive, got {step_mw}")
    probs = np.ones(1)
    for unit in units:
        if not (math.isfinite(unit.capacity_mw) and math.isfinite(unit.availability)):
            raise DataError(f"unit {unit.name!r} has non-finite data")
        k = round_half_up(unit.capacity_mw / step_mw)
        p = unit.availability
        out = np.zeros(probs.size + k)
        out[:probs.size] += (1.0 - p) * probs
        out[k:] += p * probs
        probs = out
    total = math.fsum(probs)
    if abs(total - 1.0) > MASS_TOL:
        raise NumericalError(f"COPT mass {total!r} drifted from 1")
    return _trimmed(0.0, step_mw, probs)


def cdf(dist: DiscreteDistribution, x):
    """``Pr(X <= x)``; accepts a scalar or an array."""
    xs = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(xs)):
        raise ValueError("cdf evaluated at a non-finite point")
    k = dist.grid_index(xs)
    n = dist.probs.size
    out = np.where(k >= n - 1, 1.0, dist.cum_probs[np.clip(k, 0, n - 1)])
    out = np.where(k < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def _check_steps(a: DiscreteDistribution, b: DiscreteDistribution):
    if not math.isclose(a.step_mw, b.step_mw, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"grid steps differ: {a.step_mw} vs {b.step_mw}")


def convolve(a: DiscreteDistribution, b: DiscreteDistribution) -> DiscreteDistribution:
    """Distribution of the sum of independent draws from ``a`` and ``b``."""
    _check_steps(a, b)
    probs = np.convolve(a.probs, b.probs)
    total = math.fsum(probs)
    if abs(total - 1.0) > MASS_TOL:
        raise NumericalError(f"convolution mass {total!r} drifted from 1")
    return _trimmed(a.origin_mw + b.origin_mw, a.step_mw, probs)


def negate_and_shift(dist: DiscreteDistribution, delta: float) -> DiscreteDistribution:
    """Distribution of ``delta - V`` for ``V ~ dist``."""
    return DiscreteDistribution(delta - dist.max_mw, dist.step_mw, dist.probs[::-1])


def moments(dist: DiscreteDistribution) -> tuple[float, float]:
    """Exact mean and population standard deviation in MW."""
    k = np.arange(dist.probs.size, dtype=np.float64)
    kbar = math.fsum(k * dist.probs)
    var = math.fsum((k - kbar) ** 2 * dist.probs)
    return dist.origin_mw + dist.step_mw * kbar, dist.step_mw * math.sqrt(max(var, 0.0))


def expected_shortfall(dist: DiscreteDistribution, level):
    """``E[max(level - X, 0)]``, the per-observation expected power unserved.

    Uses ``u F(level) - step * sum_{k <= K} k p_k`` with ``u = level - origin``,
    which is the exact sum rearranged.
    """
    lv = np.asarray(level, dtype=np.float64)
    if not np.all(np.isfinite(lv)):
        raise ValueError("shortfall level must be finite")
    n = dist.probs.size
    k = dist.grid_index(lv)
    u = lv - dist.origin_mw
    kc = np.clip(k, 0, n - 1)
    inner = u * dist.cum_probs[kc] - dist.step_mw * dist.cum_index_moment[kc]
    out = np.where(k < 0, 0.0, np.maximum(inner, 0.0))
    return float(out) if out.ndim == 0 else out


def read_units_csv(path: str | Path) -> list[GenUnit]:
    """Read ``name,capacity_mw,availability`` rows."""
    try:
        frame = pd.read_csv(path, dtype={"name": str}, encoding="utf-8", float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: empty unit file") from None
    missing = {"name", "capacity_mw", "availability"} - set(frame.columns)
    if missing:
        raise DataError(f"{path}: missing columns {sorted(missing)}")
    if frame.empty:
        raise DataError(f"{path}: no units listed")
    units = []
    for line, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            units.append(GenUnit(str(row.name), float(row.capacity_mw), float(row.availability)))
        except (DataError, ValueError) as exc:
            raise DataError(f"{path}:{line}: {exc}") from None
    return units


def write_units_csv(units: Iterable[GenUnit], path: str | Path):
    frame = pd.DataFrame(
        [(u.name, u.capacity_mw, u.availability) for u in units],
        columns=["name", "capacity_mw", "availability"],
    )
    frame.to_csv(path, index=False)
