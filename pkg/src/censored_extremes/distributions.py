"""Parametric families used for data generation and oracle checks.

Every family samples by inverse transform, so a draw is a pure function of
the uniform stream it is fed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError

__all__ = [
    "Distribution",
    "Pareto",
    "Burr",
    "Frechet",
    "Beta",
    "Weibull",
    "Exponential",
    "GPD",
    "TailProfile",
    "parse_distribution",
    "cdf",
    "quantile",
    "sample",
    "true_tail_profile",
]


@dataclass(frozen=True)
class TailProfile:
    """Extreme value index and right endpoint of a family.

    ``gumbel_tail`` holds ``(shape, scale)`` with
    ``-log(1 - F(x)) ~ (x / scale) ** shape`` for the light-tailed families;
    it is what decides the non-censoring index between two gamma = 0 laws.
    """

    gamma: float
    right_endpoint: float
    gumbel_tail: tuple[float, float] | None = None

    def alpha_pair(self, other: "TailProfile") -> float:
        """Asymptotic non-censoring proportion when ``other`` censors ``self``."""
        gf, gg = self.gamma, other.gamma
        tf, tg = self.right_endpoint, other.right_endpoint
        if tf < tg:
            return 1.0
        if tf > tg:
            return 0.0
        if gf != 0 and gg != 0 and (gf > 0) == (gg > 0):
            return gg / (gf + gg)
        if gf != 0 or gg != 0:
            # different max-domains on a common endpoint: the heavier tail wins
            if gf > 0 or (gf == 0 and gg < 0):
                return 0.0
            return 1.0
        if self.gumbel_tail is None or other.gumbel_tail is None:
            raise DomainError("non-censoring index undefined for this gamma = 0 pair")
        (af, sf), (ag, sg) = self.gumbel_tail, other.gumbel_tail
        if af > ag:
            return 1.0
        if af < ag:
            return 0.0
        cf, cg = sf ** (-af), sg ** (-ag)
        return cf / (cf + cg)


class Distribution:
    """Base class; subclasses implement ``_cdf`` and ``_ppf`` on arrays."""

    name: ClassVar[str] = ""

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _ppf(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tail_profile(self) -> TailProfile:
        raise NotImplementedError

    def cdf(self, x):
        out = self._cdf(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def survival(self, x):
        """1 - F(x), computed without cancellation where the family allows it."""
        out = self._sf(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def _sf(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self._cdf(x)

    def quantile(self, p):
        arr = np.asarray(p, dtype=float)
        if np.any(~((arr > 0) & (arr < 1))):
            raise DomainError(f"quantile level must lie in (0, 1), got {p!r}")
        out = self._ppf(arr)
        return float(out) if np.ndim(out) == 0 else out

    def tail_quantile(self, t):
        """U(t) = quantile(1 - 1/t) for t > 1."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 1):
            raise DomainError("tail quantile needs t > 1")
        return self.quantile(1.0 - 1.0 / t)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 1:
            raise ConfigError("sample size must be >= 1")
        return self._ppf(rng.random(n))

    def literal(self) -> str:
        args = ",".join(repr(float(v)) for v in self._params())
        return f"{self.name}({args})"

    def _params(self) -> tuple[float, ...]:
        raise NotImplementedError


def _positive(**kw: float) -> None:
    for key, val in kw.items():
        if not (math.isfinite(val) and val > 0):
            raise ConfigError(f"{key} must be a positive finite number, got {val!r}")


@dataclass(frozen=True)
class Pareto(Distribution):
    """1 - F(x) = x ** -alpha on x >= 1."""

    alpha: float
    name: ClassVar[str] = "pareto"

    def __post_init__(self):
        _positive(alpha=self.alpha)

    def _params(self):
        return (self.alpha,)

    def _cdf(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x < 1, 0.0, -np.expm1(-self.alpha * np.log(np.maximum(x, 1.0))))

    def _sf(self, x):
        return np.where(x < 1, 1.0, np.maximum(x, 1.0) ** -self.alpha)

    def _ppf(self, p):
        with np.errstate(over="ignore"):
            return np.exp(-np.log1p(-p) / self.alpha)

    def tail_profile(self):
        return TailProfile(1.0 / self.alpha, math.inf)


@dataclass(frozen=True)
class Burr(Distribution):
    """1 - F(x) = (1 + x ** c) ** -kappa on x >= 0."""

    c: float
    kappa: float
    name: ClassVar[str] = "burr"

    def __post_init__(self):
        _positive(c=self.c, kappa=self.kappa)

    def _params(self):
        return (self.c, self.kappa)

    def _cdf(self, x):
        with np.errstate(over="ignore"):
            return -np.expm1(-self.kappa * np.log1p(np.maximum(x, 0.0) ** self.c))

    def _sf(self, x):
        with np.errstate(over="ignore"):
            return np.exp(-self.kappa * np.log1p(np.maximum(x, 0.0) ** self.c))

    def _ppf(self, p):
        return np.expm1(-np.log1p(-p) / self.kappa) ** (1.0 / self.c)

    def tail_profile(self):
        return TailProfile(1.0 / (self.c * self.kappa), math.inf)


@dataclass(frozen=True)
class Frechet(Distribution):
    """F(x) = exp(-x ** -alpha) on x > 0."""

    alpha: float
    name: ClassVar[str] = "frechet"

    def __post_init__(self):
        _positive(alpha=self.alpha)

    def _params(self):
        return (self.alpha,)

    def _cdf(self, x):
        with np.errstate(divide="ignore", over="ignore"):
            xp = np.where(x > 0, x, 1.0)
            return np.where(x > 0, np.exp(-(xp ** -self.alpha)), 0.0)

    def _sf(self, x):
        with np.errstate(divide="ignore", over="ignore"):
            xp = np.where(x > 0, x, 1.0)
            return np.where(x > 0, -np.expm1(-(xp ** -self.alpha)), 1.0)

    def _ppf(self, p):
        with np.errstate(divide="ignore"):
            return (-np.log(p)) ** (-1.0 / self.alpha)

    def tail_profile(self):
        return TailProfile(1.0 / self.alpha, math.inf)


@dataclass(frozen=True)
class Beta(Distribution):
    a: float
    b: float
    name: ClassVar[str] = "beta"

    def __post_init__(self):
        _positive(a=self.a, b=self.b)

    def _params(self):
        return (self.a, self.b)

    def _cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(x, 0.0, 1.0))

    def _ppf(self, p):
        if self.a == 1.0:
            # closed form keeps quantile(cdf(x)) exact for Beta(1, b)
            return -np.expm1(np.log1p(-p) / self.b)
        return special.betaincinv(self.a, self.b, p)

    def tail_profile(self):
        return TailProfile(-1.0 / self.b, 1.0)


@dataclass(frozen=True)
class Weibull(Distribution):
    """F(x) = 1 - exp(-(x / scale) ** shape) on x >= 0."""

    shape: float
    scale: float = 1.0
    name: ClassVar[str] = "weibull"

    def __post_init__(self):
        _positive(shape=self.shape, scale=self.scale)

    def _params(self):
        return (self.shape, self.scale)

    def _cdf(self, x):
        return -np.expm1(-((np.maximum(x, 0.0) / self.scale) ** self.shape))

    def _ppf(self, p):
        return self.scale * (-np.log1p(-p)) ** (1.0 / self.shape)

    def tail_profile(self):
        return TailProfile(0.0, math.inf, (self.shape, self.scale))


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float
    name: ClassVar[str] = "exp"

    def __post_init__(self):
        _positive(rate=self.rate)

    def _params(self):
        return (self.rate,)

    def _cdf(self, x):
        return -np.expm1(-self.rate * np.maximum(x, 0.0))

    def _ppf(self, p):
        return -np.log1p(-p) / self.rate

    def tail_profile(self):
        return TailProfile(0.0, math.inf, (1.0, 1.0 / self.rate))


@dataclass(frozen=True)
class GPD(Distribution):
    """Generalized Pareto with shape ``gamma``, location ``mu``, scale ``sigma``."""

    gamma: float
    mu: float = 0.0
    sigma: float = 1.0
    name: ClassVar[str] = "gpd"

    def __post_init__(self):
        _positive(sigma=self.sigma)
        if not (math.isfinite(self.gamma) and math.isfinite(self.mu)):
            raise ConfigError("gpd shape and location must be finite")

    def _params(self):
        return (self.gamma, self.mu, self.sigma)

    def _upper(self) -> float:
        return self.mu - self.sigma / self.gamma if self.gamma < 0 else math.inf

    def _cdf(self, x):
        y = np.clip((x - self.mu) / self.sigma, 0.0, None)
        if self.gamma == 0:
            return -np.expm1(-y)
        if self.gamma < 0:
            y = np.minimum(y, -1.0 / self.gamma)
        with np.errstate(divide="ignore"):
            return -np.expm1(-np.log1p(self.gamma * y) / self.gamma)

    def _ppf(self, p):
        if self.gamma == 0:
            return self.mu - self.sigma * np.log1p(-p)
        return self.mu + self.sigma * np.expm1(-self.gamma * np.log1p(-p)) / self.gamma

    def tail_profile(self):
        if self.gamma == 0:
            return TailProfile(0.0, math.inf, (1.0, self.sigma))
        return TailProfile(self.gamma, self._upper())


_FAMILIES: dict[str, tuple[type[Distribution], tuple[int, ...]]] = {
    "pareto": (Pareto, (1,)),
    "burr": (Burr, (2,)),
    "frechet": (Frechet, (1,)),
    "beta": (Beta, (2,)),
    "weibull": (Weibull, (1, 2)),
    "exp": (Exponential, (1,)),
    "exponential": (Exponential, (1,)),
    "gpd": (GPD, (1, 2, 3)),
}

_LITERAL = re.compile(r"^\s*([a-zA-Z]+)\s*\(([^()]*)\)\s*$")


def parse_distribution(text: str) -> Distribution:
    """Parse a literal such as ``pareto(2)`` or ``burr(1.4142,1.4142)``."""
    m = _LITERAL.match(text)
    if not m:
        raise ConfigError(f"cannot parse distribution literal {text!r}")
    family = m.group(1).lower()
    if family not in _FAMILIES:
        raise ConfigError(f"unknown distribution family {family!r}")
    cls, arities = _FAMILIES[family]
    raw = [s for s in (p.strip() for p in m.group(2).split(",")) if s]
    if len(raw) not in arities:
        raise ConfigError(f"{family} takes {' or '.join(map(str, arities))} parameter(s)")
    try:
        args = [float(s) for s in raw]
    except ValueError as exc:
        raise ConfigError(f"non-numeric parameter in {text!r}") from exc
    return cls(*args)


def cdf(dist: Distribution, x):
    return dist.cdf(x)


def quantile(dist: Distribution, p):
    return dist.quantile(p)


def sample(dist: Distribution, rng: np.random.Generator, n: int) -> np.ndarray:
    return dist.sample(rng, n)


def true_tail_profile(dist: Distribution) -> TailProfile:
    return dist.tail_profile()
