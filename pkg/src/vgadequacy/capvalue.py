"""
Equivalent firm capacity (EFC) and effective load carrying capability (ELCC).

Both are roots of a monotone risk curve.  The curves are step functions of
the MW adjustment, so exact equality rarely has a solution; instead risk is
sampled on the COPT grid and interpolated linearly in log(risk) between grid
points, and the root of the interpolant is found by bisection.  When the
interpolant is flat at the target over an interval, the interval midpoint is
returned and its width is reported as ``plateau_mw``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.utils.validation import check_is_fitted

from .distribution import DiscreteDistribution, cdf
from .exceptions import NumericalError
from .jointmodel import HindcastModel, JointModel
from .risk import fold

EFC = "efc"
ELCC = "elcc"


@dataclass(frozen=True)
class CapacityValueResult:
    metric: str
    value_mw: float
    value_pct_installed: float | None
    target_risk: float
    achieved_risk: float
    iterations: int
    plateau_mw: float = 0.0

    def to_record(self) -> dict:
        pct = None if self.value_pct_installed is None else round(self.value_pct_installed, 1)
        return {
            "metric": self.metric,
            "value_mw": self.value_mw,
            "pct_installed": pct,
            "target_risk": self.target_risk,
            "achieved_risk": self.achieved_risk,
            "iterations": self.iterations,
            "plateau_mw": self.plateau_mw,
        }


class GridRiskCurve:
    """Risk sampled at multiples of ``step`` and log-linearly interpolated.

    ``grid_fn(x)`` is only ever called at grid points ``k * step``; values
    are cached, which matters when each call is a full product-model fold.
    """

    def __init__(self, grid_fn: Callable[[float], float], step: float):
        self._fn = grid_fn
        self.step = step
        self._cache: dict[int, float] = {}

    def at_grid(self, k: int) -> float:
        if k not in self._cache:
            self._cache[k] = float(self._fn(k * self.step))
        return self._cache[k]

    @property
    def n_evaluations(self) -> int:
        return len(self._cache)

    def __call__(self, x: float) -> float:
        pos = x / self.step
        k0 = math.floor(pos)
        frac = pos - k0
        r0 = self.at_grid(k0)
        if frac <= 1e-12:
            return r0
        r1 = self.at_grid(k0 + 1)
        if r0 == r1:
            return r0
        if r0 == 0.0 or r1 == 0.0:
            return 0.0
        return math.exp((1.0 - frac) * math.log(r0) + frac * math.log(r1))


def _bisect(pred: Callable[[float], bool], lo: float, hi: float, tol: float) -> tuple[float, float, int]:
    """Shrink ``[lo, hi]`` keeping ``pred(lo)`` true and ``pred(hi)`` false."""
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi, it


MAX_REFINE_CELLS = 64


def _refine(curve: GridRiskCurve, pred: Callable[[float], bool], target: float, lo: float, hi: float) -> float:
    """Exact crossing of the interpolant inside a final bracket ``[lo, hi]``.

    The interpolant is log-linear on each grid cell, so the crossing has a
    closed form once the cell holding it is known.  Falls back to the bracket
    midpoint on cells touching zero risk or when the bracket spans many cells.
    """
    step = curve.step
    if (hi - lo) / step > MAX_REFINE_CELLS:
        return 0.5 * (lo + hi)
    a = lo
    while a < hi:
        k = math.floor(a / step + 1e-12)
        b = min(hi, (k + 1) * step)
        if b >= hi or not pred(b):
            r0, r1 = curve.at_grid(k), curve.at_grid(k + 1)
            if r0 > 0.0 and r1 > 0.0 and r0 != r1 and target > 0.0:
                x = (k + math.log(r0 / target) / math.log(r0 / r1)) * step
                return min(max(x, a), b)
            return 0.5 * (a + b)
        a = b
    return 0.5 * (lo + hi)


def _solve(curve: GridRiskCurve, target: float, lo: float, hi: float, tol: float, decreasing: bool):
    """Root of ``curve(x) = target`` on a monotone curve; returns (x, iterations, plateau width)."""
    if decreasing:
        above = lambda x: curve(x) > target      # noqa: E731  left of the solution set
        not_below = lambda x: curve(x) >= target  # noqa: E731
    else:
        above = lambda x: curve(x) < target      # noqa: E731
        not_below = lambda x: curve(x) <= target  # noqa: E731
    l_lo, l_hi, it1 = _bisect(above, lo, hi, tol)
    u_lo, u_hi, it2 = _bisect(not_below, lo, hi, tol)
    left = _refine(curve, above, target, l_lo, l_hi)
    right = _refine(curve, not_below, target, u_lo, u_hi)
    plateau = max(0.0, right - left)
    if plateau <= tol:
        plateau = 0.0
    return 0.5 * (left + right), it1 + it2, plateau


def _grid_ceil(x: float, step: float) -> float:
    return math.ceil(x / step) * step


def risk_with_firm(copt: DiscreteDistribution, model: JointModel, v: float) -> float:
    """LOLP with wind replaced by ``v`` MW of firm capacity (demand atoms only)."""
    if not math.isfinite(v):
        raise ValueError("firm capacity must be finite")
    atoms = model.demand_atoms()
    return math.fsum(cdf(copt, atoms.values - v)) / atoms.values.size


def _pct(value: float, installed_mw: float | None) -> float | None:
    if installed_mw is None or installed_mw <= 0:
        return None
    return 100.0 * value / installed_mw


def efc(copt: DiscreteDistribution, model_with_wind: JointModel, tol_mw: float = 0.1,
        installed_mw: float | None = None) -> CapacityValueResult:
    """Firm capacity giving the same LOLP as the wind fleet."""
    check_is_fitted(model_with_wind)
    target = fold(copt, model_with_wind, want_epu=False)[0]
    return efc_for_target(copt, model_with_wind.demand_, target, model_with_wind.max_wind_mw,
                          tol_mw=tol_mw, installed_mw=installed_mw)


def efc_for_target(copt: DiscreteDistribution, demand, target: float, max_wind_mw: float,
                   tol_mw: float = 0.1, installed_mw: float | None = None) -> CapacityValueResult:
    """EFC when the with-wind LOLP ``target`` is already known."""
    demand_only = HindcastModel().fit(demand, np.zeros(len(demand)))
    curve = GridRiskCurve(lambda v: risk_with_firm(copt, demand_only, v), copt.step_mw)
    baseline = curve.at_grid(0)
    if max_wind_mw == 0.0 or target >= baseline:
        return CapacityValueResult(EFC, 0.0, _pct(0.0, installed_mw), target, baseline, 0)
    if target <= 0.0:
        raise NumericalError("system with wind has zero risk; EFC is unbounded")
    hi = _grid_ceil(max(float(demand_only.demand_.max()) - copt.origin_mw, 0.0) + copt.step_mw, copt.step_mw)
    if curve(hi) > target:
        raise NumericalError("EFC bracket does not contain the target risk")
    value, iters, plateau = _solve(curve, target, 0.0, hi, tol_mw, decreasing=True)
    return CapacityValueResult(EFC, value, _pct(value, installed_mw), target, curve(value), iters, plateau)


def elcc(copt: DiscreteDistribution, model_with_wind: JointModel, demand_only_model: JointModel | None = None,
         tol_mw: float = 0.1, installed_mw: float | None = None) -> CapacityValueResult:
    """Extra uniform demand the wind fleet carries at the no-wind LOLP."""
    check_is_fitted(model_with_wind)
    base_model = model_with_wind if demand_only_model is None else demand_only_model
    target = risk_with_firm(copt, base_model, 0.0)
    if target <= 0.0:
        raise NumericalError("no-wind system has zero risk; ELCC is unbounded")
    curve = GridRiskCurve(lambda e: fold(copt, model_with_wind, shift=e, want_epu=False)[0], copt.step_mw)
    start = curve.at_grid(0)
    if model_with_wind.max_wind_mw == 0.0 or start >= target:
        return CapacityValueResult(ELCC, 0.0, _pct(0.0, installed_mw), target, start, 0)
    hi = _grid_ceil(model_with_wind.max_wind_mw + copt.step_mw, copt.step_mw)
    if curve(hi) < target:
        raise NumericalError("ELCC bracket does not contain the target risk")
    value, iters, plateau = _solve(curve, target, 0.0, hi, tol_mw, decreasing=False)
    return CapacityValueResult(ELCC, value, _pct(value, installed_mw), target, curve(value), iters, plateau)

