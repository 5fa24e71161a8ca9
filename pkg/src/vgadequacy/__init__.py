"""Generation adequacy risk with wind-demand joint models, capacity values and block bootstrap."""

from .bootstrap import BootstrapResult, BootstrapSpec, bootstrap_ci, resample_independent, resample_paired
from .capvalue import CapacityValueResult, efc, elcc, risk_with_firm
from .distribution import (
    DiscreteDistribution, GenUnit, build_copt, cdf, convolve, expected_shortfall, moments, negate_and_shift,
)
from .ingest import (
    DemandSeries, PairedSeries, SeasonSpec, WindSeries, add_response_adjustment, align_and_block,
    halfhourly_to_hourly, rescale_demand, wind_to_capacity,
)
from .jointmodel import (
    HindcastModel, IndependenceModel, LoessRegressor, NetDemandAtoms, RescaledModel, ScalingFunction,
    implied_wind_marginal, lambda_eval, loess_fit, make_model, net_demand_atoms,
)
from .risk import RiskIndices, epu, lolp, season_indices, top_n_curve, top_n_share

__version__ = "0.1.0"
