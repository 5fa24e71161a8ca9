"""
Estimators of the joint distribution of demand and available wind.

Three assumptions are offered, each as a scikit-learn style estimator fitted
on a demand vector and a wind vector:

``HindcastModel``
    the empirical distribution of the paired differences ``d_t - y_t``;
``IndependenceModel``
    the product of the two empirical marginals;
``RescaledModel``
    wind conditional on demand ``d`` is the wind marginal scaled by a
    piecewise-linear factor ``lambda(d)`` that falls from ``l1`` to ``l2``
    between two normalised demand thresholds.

All three expose the same weighted-atom view of net demand.  Product models
can hold ~1e8 atoms at full scale, so risk folds stream over them rather than
materialising ``net_demand_atoms``.

``LoessRegressor`` is the local-linear smoother used to look at mean wind
load factor against normalised demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .exceptions import DataError

HINDCAST = "hindcast"
INDEPENDENCE = "independence"
RESCALED = "rescaled"
MODEL_KINDS = (HINDCAST, INDEPENDENCE, RESCALED)

# Refuse to materialise more product atoms than this; use the streaming view.
MAX_MATERIALISED_ATOMS = 50_000_000


@dataclass(frozen=True)
class ScalingFunction:
    """Demand-dependent wind scaling factor.

    Demand is first normalised by ``acs_ref_mw``.  The factor is ``l1`` up to
    ``d1_norm``, ``l2`` from ``d2_norm`` on, and linear in between.
    """

    d1_norm: float = 0.95
    d2_norm: float = 1.03
    l1: float = 1.0
    l2: float = 0.5
    acs_ref_mw: float = 1.0

    def __post_init__(self):
        if not self.acs_ref_mw > 0:
            raise ValueError(f"acs_ref_mw must be positive, got {self.acs_ref_mw}")
        if not self.d1_norm < self.d2_norm:
            raise ValueError("d1_norm must be below d2_norm")
        if not 0 < self.l2 <= self.l1 <= 1:
            raise ValueError("need 0 < l2 <= l1 <= 1")

    def __call__(self, demand_mw):
        return lambda_eval(self, demand_mw)


def lambda_eval(sf: ScalingFunction, demand_mw):
    """Scaling factor at absolute demand ``demand_mw`` (scalar or array)."""
    demand = np.asarray(demand_mw, dtype=np.float64)
    if sf.acs_ref_mw <= 0:
        raise ValueError("acs_ref_mw must be positive")
    if np.any(demand < 0) or not np.all(np.isfinite(demand)):
        raise ValueError("demand must be finite and nonnegative")
    d = demand / sf.acs_ref_mw
    ramp = sf.l1 + (d - sf.d1_norm) / (sf.d2_norm - sf.d1_norm) * (sf.l2 - sf.l1)
    out = np.where(d <= sf.d1_norm, sf.l1, np.where(d >= sf.d2_norm, sf.l2, ramp))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class NetDemandAtoms:
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if values.shape != weights.shape or values.ndim != 1:
            raise ValueError("values and weights must be 1-D and the same length")
        if not np.all(np.isfinite(values)):
            raise ValueError("atom values must be finite")
        if np.any(weights < 0) or abs(math.fsum(weights) - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.values.size

    def as_dict(self) -> dict[float, float]:
        """Aggregate equal values: ``{value: total weight}``."""
        out: dict[float, float] = {}
        for v, w in zip(self.values.tolist(), self.weights.tolist()):
            out[v] = out.get(v, 0.0) + w
        return out


def _vector(x, name: str) -> np.ndarray:
    arr = column_or_1d(np.asarray(x, dtype=np.float64), warn=False)
    if arr.size == 0:
        raise DataError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


class JointModel(BaseEstimator):
    """Common behaviour of the three joint-distribution estimators."""

    kind: str = ""

    def fit(self, demand, wind):
        """Store the demand and wind observations (MW)."""
        demand = _vector(demand, "demand")
        wind = _vector(wind, "wind")
        if np.any(wind < 0):
            raise DataError("wind must be nonnegative")
        self._check_lengths(demand, wind)
        self.demand_ = demand
        self.wind_ = wind
        return self

    def _check_lengths(self, demand, wind):
        pass

    @property
    def is_product(self) -> bool:
        return self.kind != HINDCAST

    @property
    def n_atoms(self) -> int:
        check_is_fitted(self)
        if self.is_product:
            return self.demand_.size * self.wind_.size
        return self.demand_.size

    @property
    def max_wind_mw(self) -> float:
        check_is_fitted(self)
        return float(self.wind_.max())

    def demand_atoms(self) -> NetDemandAtoms:
        """Net demand atoms of the same model with wind removed."""
        check_is_fitted(self)
        n = self.demand_.size
        return NetDemandAtoms(self.demand_.copy(), np.full(n, 1.0 / n))

    def scale_factors(self) -> np.ndarray:
        """Per-demand-atom wind multiplier (all ones except under rescaling)."""
        check_is_fitted(self)
        return np.ones(self.demand_.size)

    def iter_net_demand_atoms(self, chunk_rows: int = 256) -> Iterator[NetDemandAtoms]:
        """Stream the atoms in demand-row chunks (weights are absolute, not per chunk).

        The yielded objects are plain ``(values, weights)`` pairs; their weights
        only sum to one over the whole stream.
        """
        check_is_fitted(self)
        if not self.is_product:
            n = self.demand_.size
            yield _Chunk(self.demand_ - self.wind_, np.full(n, 1.0 / n))
            return
        lam = self.scale_factors()
        n_d, n_y = self.demand_.size, self.wind_.size
        w = 1.0 / (n_d * n_y)
        for lo in range(0, n_d, chunk_rows):
            hi = min(lo + chunk_rows, n_d)
            vals = self.demand_[lo:hi, None] - lam[lo:hi, None] * self.wind_[None, :]
            yield _Chunk(vals.ravel(), np.full(vals.size, w))

    def net_demand_atoms(self) -> NetDemandAtoms:
        """All ``(d - y, weight)`` atoms; demand-major order for product models."""
        check_is_fitted(self)
        if self.n_atoms > MAX_MATERIALISED_ATOMS:
            raise MemoryError(
                f"{self.n_atoms} atoms is too many to materialise; use iter_net_demand_atoms"
            )
        chunks = list(self.iter_net_demand_atoms(chunk_rows=max(1, self.demand_.size)))
        values = np.concatenate([c.values for c in chunks])
        weights = np.concatenate([c.weights for c in chunks])
        return NetDemandAtoms(values, weights)


@dataclass(frozen=True, eq=False)
class _Chunk:
    values: np.ndarray
    weights: np.ndarray


class HindcastModel(JointModel):
    """Empirical distribution of the observed pairs ``d_t - y_t``."""

    kind = HINDCAST

    def __init__(self):
        pass

    def _check_lengths(self, demand, wind):
        if demand.size != wind.size:
            raise DataError("hindcast needs paired observations of equal length")


class IndependenceModel(JointModel):
    """Product of the empirical demand and wind marginals."""

    kind = INDEPENDENCE

    def __init__(self):
        pass


class RescaledModel(JointModel):
    """Wind marginal rescaled by ``lambda(d)`` conditional on demand ``d``.

    Parameters
    ----------
    d1_norm, d2_norm : float
        Normalised demand at which the factor starts and stops falling.
    l1, l2 : float
        Factor below ``d1_norm`` and above ``d2_norm``.
    acs_ref_mw : float
        Demand (MW) corresponding to normalised demand 1.0.
    """

    kind = RESCALED

    def __init__(self, d1_norm=0.95, d2_norm=1.03, l1=1.0, l2=0.5, acs_ref_mw=55550.0):
        self.d1_norm = d1_norm
        self.d2_norm = d2_norm
        self.l1 = l1
        self.l2 = l2
        self.acs_ref_mw = acs_ref_mw

    @property
    def scaling_function(self) -> ScalingFunction:
        return ScalingFunction(self.d1_norm, self.d2_norm, self.l1, self.l2, self.acs_ref_mw)

    def fit(self, demand, wind):
        super().fit(demand, wind)
        self.lambda_ = np.asarray(lambda_eval(self.scaling_function, self.demand_), dtype=np.float64).reshape(-1)
        return self

    def scale_factors(self) -> np.ndarray:
        check_is_fitted(self)
        return self.lambda_


def make_model(kind: str, **params) -> JointModel:
    """Unfitted model of the given kind; ``params`` go to ``RescaledModel`` only."""
    if kind == HINDCAST:
        return HindcastModel()
    if kind == INDEPENDENCE:
        return IndependenceModel()
    if kind == RESCALED:
        return RescaledModel(**params)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def net_demand_atoms(model: JointModel) -> NetDemandAtoms:
    return model.net_demand_atoms()


def implied_wind_marginal(model: RescaledModel, grid) -> np.ndarray:
    """Wind marginal CDF implied by the rescaling, on ``grid`` (MW).

    ``(1/N_d) sum_t F_Y(y / lambda(d_t))`` with ``F_Y`` the empirical wind CDF.
    """
    if not isinstance(model, RescaledModel):
        raise TypeError("implied wind marginal is only defined for a rescaled model")
    check_is_fitted(model)
    grid = np.asarray(grid, dtype=np.float64)
    wind_sorted = np.sort(model.wind_)
    n_y = wind_sorted.size
    lams, counts = np.unique(model.lambda_, return_counts=True)
    total = np.zeros(grid.shape)
    for lam, cnt in zip(lams, counts):
        total += cnt * np.searchsorted(wind_sorted, grid / lam, side="right") / n_y
    return total / model.demand_.size


class LoessRegressor(RegressorMixin, BaseEstimator):
    """Local polynomial regression with tricube weights (no robustness passes).

    Each prediction fits a weighted polynomial of ``degree`` to the
    ``floor(span * n)`` nearest observations, with weights
    ``(1 - (dist / h)^3)^3`` where ``h`` is the distance to the farthest of them.

    Parameters
    ----------
    span : float
        Fraction of the data in each local neighbourhood, in (0, 1].
    degree : int
        Local polynomial degree (1 gives local-linear).
    """

    def __init__(self, span=0.75, degree=1):
        self.span = span
        self.degree = degree

    def fit(self, x, y):
        x = _vector(x, "x")
        y = _vector(y, "y")
        if x.size != y.size:
            raise DataError("x and y differ in length")
        if x.size < 10:
            raise DataError(f"LOESS needs at least 10 points, got {x.size}")
        if not 0 < self.span <= 1:
            raise ValueError("span must lie in (0, 1]")
        if np.ptp(x) == 0:
            raise DataError("all x values are equal")
        q = int(math.floor(self.span * x.size))
        if q < self.degree + 2:
            raise ValueError(f"span {self.span} keeps only {q} points; need at least {self.degree + 2}")
        self.x_ = x
        self.y_ = y
        self.n_neighbours_ = q
        return self

    def predict(self, x):
        check_is_fitted(self)
        x0s = _vector(x, "x")
        return np.array([self._local_fit(x0) for x0 in x0s])

    def _local_fit(self, x0: float) -> float:
        dist = np.abs(self.x_ - x0)
        h = np.partition(dist, self.n_neighbours_ - 1)[self.n_neighbours_ - 1]
        if h == 0:
            return float(self.y_[dist == 0].mean())
        w = np.clip(1.0 - (dist / h) ** 3, 0.0, None) ** 3
        keep = w > 0
        xs = self.x_[keep] - x0
        sw = np.sqrt(w[keep])
        design = np.vander(xs, self.degree + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(design * sw[:, None], self.y_[keep] * sw, rcond=None)
        return float(coef[0])


def loess_fit(x, y, span: float = 0.75, degree: int = 1, at=None) -> np.ndarray:
    """Fit LOESS to ``(x, y)`` and evaluate it at ``at`` (default: at ``x``)."""
    reg = LoessRegressor(span=span, degree=degree).fit(x, y)
    return reg.predict(reg.x_ if at is None else at)
