"""Extreme Kaplan-Meier estimator on the normalized top-k order statistics.

For a tail view with indicators d_1..d_k (d_1 belongs to the largest
observation) the jump at ratio i is

    omega_i = (d_i / i) * prod_{j=i+1..k} ((j - 1) / j) ** d_j

and EKM integrals are sum_i omega_i * phi(ratio_i). The total mass equals
1 - prod_i (1 - d_i / i), which is 1 exactly when the largest observation is
uncensored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .censored_data import TailView
from .errors import ConfigError, EvaluationError
from .kaplan_meier import StepCdf

__all__ = [
    "EkmWeights",
    "ekm_weights",
    "ekm_integral",
    "ekm_cdf",
    "ekm_total_mass",
    "named_function",
    "PHI_NAMES",
]

Phi = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class EkmWeights:
    omega: np.ndarray

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.omega))


def _tail_products(delta_top: np.ndarray) -> np.ndarray:
    """prod_{j=i+1..k} ((j-1)/j) ** d_j for i = 1..k, multiplied from j = k downward."""
    k = delta_top.size
    j = np.arange(1, k + 1, dtype=float)
    factors = np.where(delta_top == 1, (j - 1.0) / j, 1.0)
    out = np.ones(k)
    if k > 1:
        out[:-1] = np.cumprod(factors[:0:-1])[::-1]
    return out


def ekm_weights(view: TailView) -> EkmWeights:
    d = view.delta_top
    i = np.arange(1, view.k + 1, dtype=float)
    # the product is bounded below by 1/k, so direct multiplication cannot underflow
    omega = (d / i) * _tail_products(d)
    return EkmWeights(omega)


def ekm_integral(view: TailView, phi: Phi | str, weights: EkmWeights | None = None) -> float:
    if isinstance(phi, str):
        phi = named_function(phi)
    w = (weights or ekm_weights(view)).omega
    pos = w > 0
    if not np.any(pos):
        return 0.0
    vals = np.asarray(phi(view.ratios[pos]), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("phi is not finite at a ratio carrying positive weight")
    return float(np.dot(w[pos], vals))


def ekm_total_mass(view: TailView) -> float:
    return ekm_weights(view).total_mass


def ekm_cdf(view: TailView) -> StepCdf:
    """Step cdf on [1, inf) with knots at the weighted ratios, ascending."""
    w = ekm_weights(view).omega
    pos = w > 0
    # ratios are stored largest first; reverse to ascending
    r = view.ratios[pos][::-1]
    cum = np.cumsum(w[pos][::-1])
    if r.size == 0:
        return StepCdf(np.empty(0), np.empty(0))
    last = np.r_[r[1:] != r[:-1], True]
    return StepCdf(r[last].copy(), cum[last])


def _log(x):
    return np.log(x)


def _log2(x):
    return np.log(x) ** 2


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class _Power:
    p: float

    def __call__(self, x):
        return np.asarray(x, dtype=float) ** self.p


@dataclass(frozen=True)
class _LogPower:
    r: int

    def __call__(self, x):
        return np.log(x) ** self.r


@dataclass(frozen=True)
class _Indicator:
    x0: float

    def __call__(self, x):
        return (np.asarray(x, dtype=float) <= self.x0).astype(float)


PHI_NAMES = ("log", "log2", "one", "indicator(x0)", "power(p)", "logpow(r)")

_CALL = re.compile(r"^\s*(indicator|power|logpow)\s*\(\s*([^()]+?)\s*\)\s*$")


def named_function(name: str) -> Phi:
    """Resolve a test-function name: ``log``, ``log2`` = (log x)^2, ``one``,
    ``indicator(x0)``, ``power(p)`` or ``logpow(r)`` = (log x)^r."""
    simple = {"log": _log, "log2": _log2, "one": _one, "1": _one}
    key = name.strip().lower()
    if key in simple:
        return simple[key]
    m = _CALL.match(key)
    if m:
        try:
            arg = float(m.group(2))
        except ValueError:
            raise ConfigError(f"bad argument in {name!r}") from None
        if m.group(1) == "indicator":
            return _Indicator(arg)
        if m.group(1) == "power":
            return _Power(arg)
        if arg != int(arg) or arg < 1:
            raise ConfigError("logpow needs a positive integer order")
        return _LogPower(int(arg))
    raise ConfigError(f"unknown test function {name!r}; choose from {', '.join(PHI_NAMES)}")


def phi_growth(phi: Phi) -> tuple[float, bool]:
    """(power exponent, bounded) describing how fast a registered phi grows.

    Log-type functions report exponent 0. Unregistered callables report
    ``(nan, False)``.
    """
    if phi in (_log, _log2) or isinstance(phi, _LogPower):
        return 0.0, False
    if phi is _one or isinstance(phi, _Indicator):
        return 0.0, True
    if isinstance(phi, _Power):
        return phi.p, phi.p <= 0
    return math.nan, False
