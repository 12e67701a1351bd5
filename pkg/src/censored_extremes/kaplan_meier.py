"""Full-sample product-limit estimator and Kaplan-Meier integrals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .censored_data import SortedCensoredSample
from .errors import EvaluationError

__all__ = ["StepCdf", "km_estimate", "km_integral", "eval_step_cdf"]


@dataclass(frozen=True, eq=False)
class StepCdf:
    """Right-continuous step cdf: ``values[j]`` holds on ``[knots[j], knots[j+1])``."""

    knots: np.ndarray
    values: np.ndarray

    @property
    def total_mass(self) -> float:
        return float(self.values[-1]) if self.values.size else 0.0

    @property
    def jumps(self) -> np.ndarray:
        return np.diff(self.values, prepend=0.0)

    def __call__(self, x):
        return eval_step_cdf(self, x)


def eval_step_cdf(cdf: StepCdf, x):
    idx = np.searchsorted(cdf.knots, np.asarray(x, dtype=float), side="right") - 1
    vals = np.where(idx >= 0, cdf.values[np.maximum(idx, 0)] if cdf.values.size else 0.0, 0.0)
    return float(vals) if np.ndim(vals) == 0 else vals


def _product_limit(z_sorted: np.ndarray, delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Knots and cdf values after each distinct uncensored value."""
    n = z_sorted.size
    at_risk = n - np.arange(n)
    factors = 1.0 - delta / at_risk
    # running product in sorted order; censored points contribute factor 1
    surv = np.cumprod(factors)
    events = np.flatnonzero(delta == 1)
    if events.size == 0:
        return np.empty(0), np.empty(0)
    zev = z_sorted[events]
    # keep the last event index among tied event values
    last = np.r_[zev[1:] != zev[:-1], True]
    idx = events[last]
    return z_sorted[idx].copy(), 1.0 - surv[idx]


def km_estimate(sorted_sample: SortedCensoredSample) -> StepCdf:
    knots, values = _product_limit(sorted_sample.z_sorted, sorted_sample.delta_concomitant)
    return StepCdf(knots, values)


def km_integral(sorted_sample: SortedCensoredSample, phi: Callable[[np.ndarray], np.ndarray]) -> float:
    """Integral of ``phi`` against the product-limit measure (jumps only)."""
    cdf = km_estimate(sorted_sample)
    if cdf.knots.size == 0:
        return 0.0
    vals = np.asarray(phi(cdf.knots), dtype=float)
    jumps = cdf.jumps
    bad = ~np.isfinite(vals) & (jumps > 0)
    if np.any(bad):
        raise EvaluationError(f"phi is not finite at {cdf.knots[bad][0]!r}")
    return float(np.sum(np.where(jumps > 0, vals, 0.0) * jumps))
