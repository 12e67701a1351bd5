"""Extreme value index estimators built on EKM integrals, plus classical
counterparts and the division-by-p-hat censoring adaptations used as
benchmarks."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np

from .censored_data import TailView, uncensored_fraction
from .ekm import ekm_integral, ekm_weights
from .errors import DegenerateEstimateError, DomainError, EvaluationError, SingularMomentError

__all__ = [
    "EviEstimate",
    "ESTIMATOR_IDS",
    "hill_censored",
    "log_moment",
    "moment_censored",
    "moment_uncensored",
    "residual_estimator",
    "classical_hill",
    "benchmark_hill",
    "benchmark_moment",
    "classify_mda",
    "moment_from_log_moments",
    "estimate",
    "CLASSIFICATION_RADIUS",
]

MdaLabel = Literal["frechet", "gumbel", "weibull"]

ESTIMATOR_IDS = (
    "hill_censored",
    "moment_censored",
    "hill_benchmark",
    "moment_benchmark",
    "moment_uncensored",
)

CLASSIFICATION_RADIUS = 0.2
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class EviEstimate:
    gamma_hat: float
    k: int
    n: int | None
    estimator_id: str
    normalized: bool
    variance_hat: float | None = None
    ci: tuple[float, float, float] | None = None
    mda_label: MdaLabel | None = None

    def __post_init__(self):
        if self.ci is not None:
            if self.variance_hat is None:
                raise ValueError("a confidence interval needs a variance")
            lo, hi, _ = self.ci
            if not lo <= self.gamma_hat <= hi:
                raise ValueError("confidence interval must contain the estimate")
        if self.mda_label is None:
            object.__setattr__(self, "mda_label", classify_mda(self.gamma_hat))

    def with_interval(self, variance: float, lo: float, hi: float, level: float) -> "EviEstimate":
        return replace(self, variance_hat=variance, ci=(lo, hi, level))


def classify_mda(gamma_hat: float, radius: float = CLASSIFICATION_RADIUS) -> MdaLabel:
    """Gumbel inside the open ball of ``radius`` around 0, else by sign."""
    if not radius > 0:
        raise DomainError("classification radius must be positive")
    if abs(gamma_hat) < radius:
        return "gumbel"
    return "frechet" if gamma_hat > 0 else "weibull"


def _mass_or_raise(view: TailView, weights) -> float:
    mass = weights.total_mass
    if mass <= 0:
        raise DegenerateEstimateError(f"all top-{view.k} observations are censored")
    return mass


def log_moment(view: TailView, r: int, normalized: bool = False) -> float:
    """EKM integral of (log x)^r, optionally divided by the EKM total mass."""
    if r < 1 or int(r) != r:
        raise DomainError("log-moment order must be a positive integer")
    w = ekm_weights(view)
    mass = _mass_or_raise(view, w)
    val = ekm_integral(view, (lambda x: np.log(x) ** r) if r > 1 else np.log, weights=w)
    return val / mass if normalized else val


def hill_censored(view: TailView, normalized: bool = False, n: int | None = None) -> EviEstimate:
    return EviEstimate(log_moment(view, 1, normalized), view.k, n, "hill_censored", normalized)


def moment_from_log_moments(m1: float, m2: float) -> float:
    """M1 + 1 - 1/2 (1 - M1^2/M2)^-1, guarded against a vanishing denominator."""
    if not m2 > 0 or m2 - m1 * m1 <= SINGULAR_TOL:
        raise SingularMomentError(f"singular log-moments: M1={m1!r}, M2={m2!r}")
    return m1 + 1.0 - 0.5 / (1.0 - m1 * m1 / m2)


def moment_censored(view: TailView, normalized: bool = False, n: int | None = None) -> EviEstimate:
    w = ekm_weights(view)
    mass = _mass_or_raise(view, w)
    m1 = ekm_integral(view, np.log, weights=w)
    m2 = ekm_integral(view, lambda x: np.log(x) ** 2, weights=w)
    if normalized:
        m1, m2 = m1 / mass, m2 / mass
    return EviEstimate(moment_from_log_moments(m1, m2), view.k, n, "moment_censored", normalized)


def residual_estimator(values, theta: Callable[[np.ndarray], np.ndarray]) -> float:
    """(1/k) sum theta(r_i) over the top-k ratios."""
    vals = np.asarray(theta(np.asarray(values, dtype=float)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("theta is not finite at every ratio")
    return float(np.mean(vals))


def classical_hill(values) -> float:
    return residual_estimator(values, np.log)


def moment_uncensored(values) -> float:
    logs = np.log(np.asarray(values, dtype=float))
    return moment_from_log_moments(float(np.mean(logs)), float(np.mean(logs**2)))


def _p_hat_or_raise(view: TailView) -> float:
    p_hat = uncensored_fraction(view)
    if p_hat <= 0:
        raise DegenerateEstimateError(f"no uncensored observation among the top {view.k}")
    return p_hat


def benchmark_hill(view: TailView, normalized: bool = False, n: int | None = None) -> EviEstimate:
    """Classical Hill of the ratios divided by the top-k uncensored fraction."""
    p_hat = _p_hat_or_raise(view)
    return EviEstimate(classical_hill(view.ratios) / p_hat, view.k, n, "hill_benchmark", normalized)


def benchmark_moment(view: TailView, normalized: bool = False, n: int | None = None) -> EviEstimate:
    """Classical moment estimator divided by the top-k uncensored fraction."""
    p_hat = _p_hat_or_raise(view)
    return EviEstimate(moment_uncensored(view.ratios) / p_hat, view.k, n, "moment_benchmark", normalized)


def _moment_ignoring_censoring(view: TailView, normalized: bool = False, n: int | None = None) -> EviEstimate:
    return EviEstimate(moment_uncensored(view.ratios), view.k, n, "moment_uncensored", normalized)


_DISPATCH: dict[str, Callable[..., EviEstimate]] = {
    "hill_censored": hill_censored,
    "moment_censored": moment_censored,
    "hill_benchmark": benchmark_hill,
    "moment_benchmark": benchmark_moment,
    "moment_uncensored": _moment_ignoring_censoring,
}


def estimate(
    estimator_id: str, view: TailView, normalized: bool = False, n: int | None = None
) -> EviEstimate:
    """Dispatch on an estimator id (dashes or underscores accepted)."""
    key = estimator_id.replace("-", "_")
    try:
        fn = _DISPATCH[key]
    except KeyError:
        raise DomainError(
            f"unknown estimator {estimator_id!r}; choose from {', '.join(ESTIMATOR_IDS)}"
        ) from None
    return fn(view, normalized=normalized, n=n)


def log_moment_target(gamma_f: float, r: int) -> float:
    """r-th log-moment of the limiting Pareto excess law: r! * gamma^r."""
    return math.factorial(r) * gamma_f**r
