"""Adequacy indices from a COPT and a fitted joint model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .distribution import DiscreteDistribution, cdf, expected_shortfall
from .exceptions import NumericalError
from .jointmodel import HINDCAST, JointModel


@dataclass(frozen=True)
class RiskIndices:
    lolp: float
    lole: float
    epu: float
    eeu: float
    n_periods: float

    def to_record(self) -> dict:
        """JSON-ready record with unit-suffixed keys."""
        return {
            "lolp": self.lolp,
            "lole_hours": self.lole,
            "epu_mw": self.epu,
            "eeu_mwh": self.eeu,
            "n_periods": self.n_periods,
        }


def fold(copt: DiscreteDistribution, model: JointModel, shift: float = 0.0, want_epu: bool = True):
    """``(LOLP, EPU)`` of the system whose net-demand atoms are moved up by ``shift``."""
    check_is_fitted(model)
    # With no wind every product row is N_y copies of its demand atom; fold the demand atoms alone.
    zero_wind = not np.any(model.wind_)
    if model.kind == HINDCAST or zero_wind:
        values = (model.demand_ - (model.wind_ if model.kind == HINDCAST else 0.0)) + shift
        n = values.size
        lolp_ = math.fsum(cdf(copt, values)) / n
        epu_ = math.fsum(expected_shortfall(copt, values)) / n if want_epu else 0.0
        return lolp_, epu_
    lolp_rows, epu_rows = _kernels.product_row_sums(
        model.demand_, model.scale_factors(), model.wind_, copt, shift=shift, want_epu=want_epu
    )
    n = model.demand_.size * model.wind_.size
    return math.fsum(lolp_rows) / n, math.fsum(epu_rows) / n


def lolp(copt: DiscreteDistribution, model: JointModel) -> float:
    """Loss-of-load probability: weighted mean of ``F_X`` over net-demand atoms."""
    return fold(copt, model, want_epu=False)[0]


def epu(copt: DiscreteDistribution, model: JointModel) -> float:
    """Expected power unserved (MW) at a random period."""
    return fold(copt, model)[1]


def season_indices(copt: DiscreteDistribution, model: JointModel, n_periods: float) -> RiskIndices:
    if not n_periods > 0:
        raise ValueError("n_periods must be positive")
    p, e = fold(copt, model)
    return RiskIndices(lolp=p, lole=p * n_periods, epu=e, eeu=e * n_periods, n_periods=n_periods)


def top_n_curve(copt: DiscreteDistribution, model: JointModel, n_max: int | None = None) -> np.ndarray:
    """Share of hindcast LOLP from the ``n`` highest net-demand hours, n = 1..n_max.

    Hours are ranked by net demand, ties by original order (timestamp).
    """
    check_is_fitted(model)
    if model.kind != HINDCAST:
        raise ValueError("top-n decomposition is only defined for the hindcast model")
    values = model.demand_ - model.wind_
    n_all = values.size
    n_max = n_all if n_max is None else int(n_max)
    if not 1 <= n_max <= n_all:
        raise ValueError(f"n must lie in [1, {n_all}]")
    order = np.lexsort((np.arange(n_all), -values))
    running = np.cumsum(cdf(copt, values[order]))
    total = running[-1]
    if total <= 0:
        raise NumericalError("hindcast LOLP is zero; top-n shares are undefined")
    return running[:n_max] / total


def top_n_share(copt: DiscreteDistribution, model: JointModel, n: int) -> float:
    return float(top_n_curve(copt, model, n)[-1])
