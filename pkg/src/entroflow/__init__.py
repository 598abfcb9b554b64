"""Gibbs and conditional entropy of Gaussian laws for linear SDEs with and without delay."""

__version__ = "0.1.0"

from ._backend import get_backend, set_backend
from .curves import EntropyCurve, is_non_monotone, strict_extrema
from .dde_kernel import (
    BrownianHistory,
    DelayParams,
    FundamentalSolution,
    HayesReport,
    PointHistory,
    Stability,
    TabulatedHistory,
    fundamental_solution,
    hayes_report,
    hayes_stable,
    integrate_xx,
    solution_map,
    solution_segment,
)
from .errors import DomainError, NoStationaryDensity, QuadratureError, SimulationError
from .gaussian_entropy import (
    Gaussian1D,
    GaussianMixture,
    conditional_entropy,
    cross_log_expectation,
    entropy_bridge_residual,
    gibbs_entropy,
    h_ne,
    mixture_conditional_entropy,
)
from .mc_sim import (
    EnsembleSummary,
    SimConfig,
    estimate_conditional_entropy,
    estimate_entropy_gaussian_plugin,
    estimate_entropy_histogram,
    simulate_ou_exact,
    simulate_sdde_em,
)
from .ou_process import OUParams, Trend, ou_entropy_curve, ou_gibbs_trend, ou_stationary, ou_transition, ou_variance
from .sdde_gaussian import (
    PairLaw,
    StationaryLaw,
    brownian_state_variance,
    conditional_mean,
    covariance,
    entropy_curve_brownian,
    entropy_curve_point,
    entropy_lower_bound,
    fpe_residual,
    pair_law,
    sdde_variance,
    stationary_law,
)
