"""Extreme value index estimation for randomly right-censored data."""

from .asymptotics import (
    AsymptoticLaw,
    SecondOrderParams,
    confidence_interval,
    hill_asymptotics,
    limit_variance_montecarlo,
    limit_variance_quadrature,
    moment_asymptotics,
    plugin_variance,
    with_confidence_interval,
)
from .censored_data import (
    CensoredSample,
    SortedCensoredSample,
    TailView,
    generate_censored,
    read_survival_csv,
    sort_with_concomitants,
    top_k_view,
    uncensored_fraction,
    write_survival_csv,
)
from .datasets import load_synthetic_survival, make_synthetic_survival
from .distributions import parse_distribution
from .ekm import ekm_cdf, ekm_integral, ekm_total_mass, ekm_weights
from .errors import CensoredExtremesError
from .estimators import (
    EviEstimate,
    benchmark_hill,
    benchmark_moment,
    classify_mda,
    estimate,
    hill_censored,
    moment_censored,
)
from .kaplan_meier import km_estimate, km_integral
from .simulation import ExperimentResult, ExperimentSpec, preset, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AsymptoticLaw",
    "CensoredExtremesError",
    "CensoredSample",
    "EviEstimate",
    "ExperimentResult",
    "ExperimentSpec",
    "SecondOrderParams",
    "SortedCensoredSample",
    "TailView",
    "benchmark_hill",
    "benchmark_moment",
    "classify_mda",
    "confidence_interval",
    "ekm_cdf",
    "ekm_integral",
    "ekm_total_mass",
    "ekm_weights",
    "estimate",
    "generate_censored",
    "hill_asymptotics",
    "hill_censored",
    "km_estimate",
    "km_integral",
    "limit_variance_montecarlo",
    "limit_variance_quadrature",
    "load_synthetic_survival",
    "make_synthetic_survival",
    "moment_asymptotics",
    "moment_censored",
    "parse_distribution",
    "plugin_variance",
    "preset",
    "read_survival_csv",
    "run_experiment",
    "sort_with_concomitants",
    "top_k_view",
    "uncensored_fraction",
    "with_confidence_interval",
    "write_survival_csv",
]
