"""Asymptotic laws of censored Hill, EKM-cdf and censored moment estimators,
plug-in variances, normal confidence intervals, and two numerical oracles for
the limit variance var(W(phi)) under the Pareto limit model.

Limit model used by the oracles: 1 - F(x) = x**(-1/gamma_f) and
1 - G(x) = x**(-1/gamma_g) on x >= 1, V = min(X, Y), delta = 1{X <= Y}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Literal

import numpy as np
from scipy import integrate

from .censored_data import TailView, uncensored_fraction
from .ekm import Phi, named_function, phi_growth
from .errors import DomainError, GuardError, NumericError
from .estimators import CLASSIFICATION_RADIUS, EviEstimate, classify_mda

__all__ = [
    "AsymptoticLaw",
    "SecondOrderParams",
    "h_rho",
    "H_gamma_rho",
    "hill_asymptotics",
    "ekm_cdf_asymptotics",
    "moment_asymptotics",
    "moment_pos",
    "moment_zero",
    "moment_neg",
    "moment_neg_uncensored_variance",
    "moment_pair_asymptotics",
    "neg_sigma1_sq",
    "neg_sigma2_sq",
    "neg_sigma12",
    "neg_a1",
    "neg_a2",
    "neg_b_ell",
    "limit_variance_quadrature",
    "limit_variance_montecarlo",
    "plugin_variance",
    "confidence_interval",
]


@dataclass(frozen=True)
class AsymptoticLaw:
    """Limit N(bias, variance) of sqrt(k) * (estimator - target)."""

    bias: float
    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise DomainError(f"asymptotic variance must be nonnegative, got {self.variance}")


@dataclass(frozen=True)
class SecondOrderParams:
    """Second-order parameter ``rho`` and the scalar bias channels.

    ``lam`` is the main channel in every case, ``lam_hat`` the endpoint
    channel of the negative case, and ``lam_tilde``/``rho_tilde`` the second
    channel of the zero case.
    """

    rho: float = 0.0
    lam: float = 0.0
    lam_hat: float = 0.0
    lam_tilde: float = 0.0
    rho_tilde: float = 0.0

    def __post_init__(self):
        if self.rho > 0 or self.rho_tilde > 0:
            raise DomainError("second-order parameters must be <= 0")


NO_BIAS = SecondOrderParams()


def _hs(x, s):
    """(x**s - 1) / s with the log limit at s = 0."""
    logx = np.log(x)
    if s == 0:
        return logx
    return np.expm1(s * logx) / s


def h_rho(x, rho: float):
    x = np.asarray(x, dtype=float)
    if np.any(x < 1):
        raise DomainError("h_rho is defined for x >= 1")
    out = _hs(x, rho)
    return float(out) if out.ndim == 0 else out


def H_gamma_rho(x, gamma: float, rho: float):
    """(1/rho) (h_{gamma+rho}(x) - h_gamma(x)) with the analytic limits."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 1):
        raise DomainError("H_gamma_rho is defined for x >= 1")
    if rho > 0:
        raise DomainError("rho must be <= 0")
    logx = np.log(x)
    if rho != 0:
        out = (_hs(x, gamma + rho) - _hs(x, gamma)) / rho
    elif gamma == 0:
        out = 0.5 * logx**2
    else:
        # d/ds (x^s - 1)/s at s = gamma
        xs = np.exp(gamma * logx)
        out = (gamma * xs * logx - np.expm1(gamma * logx)) / gamma**2
    return float(out) if out.ndim == 0 else out


def _require(cond: bool, guard: str, message: str) -> None:
    if not cond:
        raise GuardError(f"{message} (requires {guard})", guard)


def _check_heavy(gamma_f: float, gamma_g: float) -> None:
    _require(gamma_f > 0, "gamma_F > 0", f"gamma_F = {gamma_f}")
    _require(gamma_g > gamma_f, "gamma_G > gamma_F", f"gamma_G = {gamma_g}, gamma_F = {gamma_f}")


def hill_asymptotics(gamma_f: float, gamma_g: float, so: SecondOrderParams = NO_BIAS) -> AsymptoticLaw:
    _check_heavy(gamma_f, gamma_g)
    return AsymptoticLaw(
        so.lam / (1.0 - so.rho), gamma_g * gamma_f**2 / (gamma_g - gamma_f)
    )


def ekm_cdf_asymptotics(
    x0: float, gamma_f: float, gamma_g: float, so: SecondOrderParams = NO_BIAS
) -> AsymptoticLaw:
    """Law of the EKM cdf at a fixed point x0 > 1.

    The indicator test function is bounded, so the moment condition holds for
    any positive pair of indices; only positivity is enforced.
    """
    _require(x0 > 1, "x0 > 1", f"x0 = {x0}")
    _require(gamma_f > 0 and gamma_g > 0, "gamma_F > 0 and gamma_G > 0",
             f"gamma_F = {gamma_f}, gamma_G = {gamma_g}")
    gamma_h = 1.0 / (1.0 / gamma_f + 1.0 / gamma_g)
    xf = x0 ** (1.0 / gamma_f)
    bias = so.lam * h_rho(xf, so.rho) / (gamma_f * xf)
    var = (gamma_h / gamma_f) * (x0 ** (1.0 / gamma_g) - x0 ** (-1.0 / gamma_f)) / xf
    return AsymptoticLaw(bias, var)


def moment_pair_asymptotics(
    gamma_f: float, gamma_g: float, so: SecondOrderParams = NO_BIAS
) -> tuple[np.ndarray, np.ndarray]:
    """Joint law of sqrt(k) (M1 - gamma, M2 - 2 gamma^2) in the heavy-tailed case."""
    _check_heavy(gamma_f, gamma_g)
    gf, gg, rho = gamma_f, gamma_g, so.rho
    d = gg - gf
    bias = np.array([so.lam / (1 - rho), 2 * so.lam * gf * (2 - rho) / (1 - rho) ** 2])
    s11 = gg * gf**2 / d
    s12 = 2 * gg * gf**3 * (2 * gg - gf) / d**2
    s22 = 4 * gg * gf**4 * (5 * gg**2 - 4 * gg * gf + gf**2) / d**3
    return bias, np.array([[s11, s12], [s12, s22]])


def moment_pos(gamma_f: float, gamma_g: float, so: SecondOrderParams = NO_BIAS) -> AsymptoticLaw:
    _check_heavy(gamma_f, gamma_g)
    gf, gg, rho = gamma_f, gamma_g, so.rho
    bias = so.lam * (gf - gf * rho + rho) / (gf * (1 - rho) ** 2)
    var = (gg**3 + gg * gf**2 * (gg - gf + 1) ** 2) / (gg - gf) ** 3
    return AsymptoticLaw(bias, var)


def moment_zero(alpha_f: float, so: SecondOrderParams = NO_BIAS) -> AsymptoticLaw:
    _require(0.5 < alpha_f <= 1, "1/2 < alpha_F <= 1", f"alpha_F = {alpha_f}")
    alpha_g = 1.0 - alpha_f
    rt = so.rho_tilde
    bias = so.lam * (1 + alpha_f) / alpha_f**2 + so.lam_tilde * (1 - rt + alpha_f * rt) / (1 - rt) ** 2
    var = alpha_f * (alpha_f**2 + alpha_g**2) / (alpha_f - alpha_g) ** 3
    return AsymptoticLaw(bias, var)


def _check_light(gamma_f: float, gamma_g: float) -> None:
    _require(gamma_f < 0, "gamma_F < 0", f"gamma_F = {gamma_f}")
    _require(gamma_g < 0 and 1 / gamma_f < 1 / gamma_g, "1/gamma_F < 1/gamma_G < 0",
             f"gamma_F = {gamma_f}, gamma_G = {gamma_g}")


def _gamma_h(gf: float, gg: float) -> float:
    return 1.0 / (1.0 / gf + 1.0 / gg)


def _gap_product(gf: float, gg: float, js) -> float:
    return math.prod(gg - gf - j * gf * gg for j in js)


def neg_sigma1_sq(gf: float, gg: float) -> float:
    return (gf + gg) ** 2 / (gg * (1 - gf) ** 2 * (gg * (1 - 2 * gf) - gf))


def neg_sigma2_sq(gf: float, gg: float) -> float:
    poly = 22 * gf**2 * gg**2 - 21 * gf * gg**2 + 5 * gg**2 + 9 * gf**2 * gg - 4 * gf * gg + gf**2
    den = gg**3 * (1 - gf) ** 2 * (1 - 2 * gf) ** 2 * _gap_product(gf, gg, (2, 3, 4))
    return 4 * (gf + gg) ** 4 * poly / den


def neg_sigma12(gf: float, gg: float) -> float:
    num = 2 * (gf + gg) ** 3 * (2 * gg - gf - 4 * gf * gg)
    den = gg**2 * (1 - gf) ** 2 * (1 - 2 * gf) * _gap_product(gf, gg, (2, 3))
    return num / den


def neg_a1(gf: float, gg: float) -> float:
    """Delta-method weight of the scaled first log-moment.

    The scaled first moment itself vanishes at rate tau - Z, so only the
    ratio M1^2/M2 contributes; there is no additive unit term.
    """
    return -2 * gg * (1 - gf) ** 2 * (1 - 2 * gf) / (gf + gg)


def neg_a2(gf: float, gg: float) -> float:
    return gg**2 * (1 - gf) ** 2 * (1 - 2 * gf) ** 2 / (2 * (gf + gg) ** 2)


def neg_b_ell(ell: int, gf: float, gg: float, so: SecondOrderParams = NO_BIAS) -> float:
    """Bias of the ell-th scaled log-moment, ell = 1, 2."""
    gh, rho = _gamma_h(gf, gg), so.rho
    den1 = gh**ell * math.prod((1 - i * gf) * (1 - rho - i * gf) for i in range(1, ell + 1))
    t1 = ell * gf ** (ell - 1) * (1 + (ell - 1) * (1 - rho - 3 * gf)) / den1
    den2 = 2 * gh**ell * math.prod(1 - i * gf for i in range(1, ell + 2))
    t2 = ell**2 * gf**ell / den2
    return so.lam * t1 - so.lam_hat * t2


def moment_neg(gamma_f: float, gamma_g: float, so: SecondOrderParams = NO_BIAS) -> AsymptoticLaw:
    _check_light(gamma_f, gamma_g)
    gf, gg, rho = gamma_f, gamma_g, so.rho
    gh = _gamma_h(gf, gg)
    b1 = (1 - gf) * (1 - 2 * gf) / (1 - gf - rho) * (
        (2 - 3 * gf - rho) / (1 - 2 * gf - rho) - 2 / gf + 1 / (gh * (1 - gf) ** 2 * (1 - 2 * gf))
    )
    b2 = (1 - gf) * (1 - gf - gf**2) / (1 - 3 * gf) - gf / (2 * gh * (1 - gf) * (1 - 2 * gf))
    a1, a2 = neg_a1(gf, gg), neg_a2(gf, gg)
    var = a1**2 * neg_sigma1_sq(gf, gg) + 2 * a1 * a2 * neg_sigma12(gf, gg) + a2**2 * neg_sigma2_sq(gf, gg)
    return AsymptoticLaw(so.lam * b1 + so.lam_hat * b2, var)


def moment_neg_uncensored_variance(gamma_f: float) -> float:
    """gamma_G -> -inf limit of the negative-case variance (classical moment estimator)."""
    g = gamma_f
    _require(g < 0, "gamma_F < 0", f"gamma_F = {g}")
    return (1 - g) ** 2 * (1 - 2 * g) * (1 - g + 6 * g**2) / ((1 - 3 * g) * (1 - 4 * g))


Case = Literal["pos", "zero", "neg"]


def moment_asymptotics(case: Case, so: SecondOrderParams = NO_BIAS, **params: float) -> AsymptoticLaw:
    """Dispatch to the positive (gamma_f, gamma_g), zero (alpha_f) or negative
    (gamma_f, gamma_g) case of the censored moment estimator law."""
    try:
        if case == "pos":
            return moment_pos(params["gamma_f"], params["gamma_g"], so)
        if case == "zero":
            return moment_zero(params["alpha_f"], so)
        if case == "neg":
            return moment_neg(params["gamma_f"], params["gamma_g"], so)
    except KeyError as exc:
        raise DomainError(f"case {case!r} needs parameter {exc.args[0]!r}") from None
    raise DomainError(f"unknown case {case!r}")


# ---------------------------------------------------------------------------
# limit variance oracles


def _resolve_phi(phi: Phi | str) -> Phi:
    return named_function(phi) if isinstance(phi, str) else phi


def _check_phi_condition(phi: Phi, gamma_f: float, gamma_g: float) -> None:
    _check_heavy(gamma_f, gamma_g)
    p, _ = phi_growth(phi)
    if math.isfinite(p) and p > 0:
        _require(2 * p < 1 / gamma_f - 1 / gamma_g, "2p < 1/gamma_F - 1/gamma_G",
                 f"power({p}) has no finite limit variance here")


def _quad(f, a, b, tol, points=()):
    pts = [p for p in points if a < p < b]
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if pts and math.isinf(b):
                # quad accepts break points on finite ranges only
                edges = [a, *sorted(pts), b]
                return sum(
                    integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=400)[0]
                    for lo, hi in zip(edges, edges[1:])
                )
            val, _ = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=400, points=pts or None)
        except integrate.IntegrationWarning as exc:
            raise NumericError(f"quadrature did not converge: {exc}") from None
    return val


def _breaks(phi: Phi) -> tuple[float, ...]:
    """Points where a registered phi jumps."""
    x0 = getattr(phi, "x0", None)
    return (float(x0),) if x0 is not None else ()


def limit_variance_quadrature(
    phi: Phi | str,
    gamma_f: float,
    gamma_g: float,
    inner_tol: float = 1e-9,
    outer_tol: float = 1e-8,
) -> float:
    """var(W(phi)) by adaptive Gauss-Kronrod quadrature (QUADPACK).

    With a = 1/gamma_f, b = 1/gamma_g, c = 1 + b/a and s = a log z:

        Psi(v)    = int_{a log v}^inf phi(e^(s/a)) e^-s ds
        gamma1(v) = v^(a+b) Psi(v)
        gamma2(v) = b/(a+b) [ int_0^{a log v} phi(e^(s/a)) (e^(cs) - 1) e^-s ds
                              + (v^(a+b) - 1) Psi(v) ]

    and the outer expectation runs over u = v^-(a+b), which is uniform,
    integrated in log v.
    """
    phi = _resolve_phi(phi)
    _check_phi_condition(phi, gamma_f, gamma_g)
    a, b = 1.0 / gamma_f, 1.0 / gamma_g
    c = 1.0 + b / a
    alpha = a / (a + b)
    s_breaks = tuple(a * math.log(x) for x in _breaks(phi) if x > 1)

    def g(s):
        return float(phi(np.float64(math.exp(s / a))))

    def psi_scaled(s0):
        # e^s0 Psi(s0) = int_0^inf phi(e^((s0+t)/a)) e^-t dt keeps full relative accuracy for large s0
        def f(t):
            s = s0 + t
            # the moment condition makes the integrand decay; far out it is 0 in floating point
            if t > 745.0 or s / a > 700.0:
                return 0.0
            return g(s) * math.exp(-t)

        return _quad(f, 0.0, math.inf, inner_tol, tuple(x - s0 for x in s_breaks))

    def parts(v):
        s0 = a * math.log(v)
        ps = psi_scaled(s0)
        j = _quad(lambda s: g(s) * (math.exp((c - 1) * s) - math.exp(-s)), 0.0, s0, inner_tol, s_breaks)
        # v^(a+b) Psi = e^((c-1) s0) psi_scaled and Psi = e^-s0 psi_scaled
        gamma1 = math.exp((c - 1) * s0) * ps
        gamma2 = b / (a + b) * (j + gamma1 - math.exp(-s0) * ps)
        return float(phi(np.float64(v))) * v**b - gamma2, gamma1 - gamma2

    def second_moment(w):
        # u = v^-(a+b) uniform, written in w = log v to avoid the algebraic endpoint at u = 0
        if (a + b) * w > 700.0:
            return 0.0
        dens = (a + b) * math.exp(-(a + b) * w)
        w1, w0 = parts(math.exp(w))
        return dens * (alpha * w1 * w1 + (1 - alpha) * w0 * w0)

    mean = psi_scaled(0.0)
    w_breaks = tuple(math.log(x) for x in _breaks(phi) if x > 1)
    ew2 = _quad(second_moment, 0.0, math.inf, outer_tol, w_breaks)
    return max(ew2 - mean * mean, 0.0)


@dataclass(frozen=True)
class MonteCarloVariance:
    variance: float
    std_error: float
    n_draws: int


def limit_variance_montecarlo(
    phi: Phi | str,
    gamma_f: float,
    gamma_g: float,
    n_draws: int = 1_000_000,
    rng: np.random.Generator | None = None,
    grid_step: float = 1e-3,
) -> MonteCarloVariance:
    """Sample (V, delta) from the limit model and average W(phi).

    gamma0..gamma2 are tabulated from their defining integrals on a grid in
    s = a log v (cumulative Simpson) and interpolated, which keeps this route
    independent of the closed single-integral forms used by the quadrature.
    """
    phi = _resolve_phi(phi)
    _check_phi_condition(phi, gamma_f, gamma_g)
    rng = rng if rng is not None else np.random.default_rng(20240601)
    a, b = 1.0 / gamma_f, 1.0 / gamma_g
    alpha = a / (a + b)

    u = rng.random(n_draws)
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    delta = rng.random(n_draws) < alpha
    s = -alpha * np.log(u)  # = a log V

    s_max = float(s.max()) + 1.0
    tail_end = s_max + 40.0
    grid = np.arange(0.0, tail_end + grid_step, grid_step)
    z = np.exp(grid / a)
    # Psi(v) = (1/gamma_f) int_v^inf phi(z) z^(-a-1) dz = int_{s}^inf phi(e^{s'/a}) e^{-s'} ds'
    dens = np.asarray(phi(z), dtype=float) * np.exp(-grid)
    cum = integrate.cumulative_simpson(dens, dx=grid_step, initial=0.0)
    psi = cum[-1] - cum
    # gamma2(v) = b int_1^v w^(a+b-1) Psi(w) dw = (b/a) int_0^s e^{s'(a+b)/a} Psi(s') ds'
    expo = np.exp(grid * (a + b) / a)
    gamma2 = (b / a) * integrate.cumulative_simpson(expo * psi, dx=grid_step, initial=0.0)
    gamma1 = expo * psi

    keep = grid <= s_max
    g1 = np.interp(s, grid[keep], gamma1[keep])
    g2 = np.interp(s, grid[keep], gamma2[keep])
    v = np.exp(s / a)
    gamma0 = v**b
    w = np.where(delta, np.asarray(phi(v), dtype=float) * gamma0, g1) - g2
    centered = w - w.mean()
    sq = centered**2
    var = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(n_draws))
    return MonteCarloVariance(var, se, n_draws)


# ---------------------------------------------------------------------------
# plug-in inference

_HILL_IDS = {"hill_censored", "hill_benchmark"}
_MOMENT_IDS = {"moment_censored", "moment_benchmark", "moment_uncensored"}


def _gamma_g_from_alpha(gamma_f: float, p_hat: float) -> float:
    return gamma_f * p_hat / (1.0 - p_hat)


def plugin_variance(view: TailView, estimate: EviEstimate) -> float:
    """Asymptotic variance evaluated at (gamma_hat, p_hat), all bias channels 0.

    The top-k uncensored fraction p_hat estimates alpha_F. Moment-type
    estimates are routed to the positive, zero or negative law by their
    max-domain label.
    """
    p_hat = uncensored_fraction(view)
    _require(p_hat > 0, "p_hat > 0", "no uncensored observation in the tail")
    g = estimate.gamma_hat
    if estimate.estimator_id in _HILL_IDS:
        _require(g > 0, "gamma_hat > 0", f"Hill plug-in needs a positive estimate, got {g}")
        if p_hat == 1.0:
            return g * g
        _require(p_hat > 0.5, "gamma_G > gamma_F (p_hat > 1/2)", f"p_hat = {p_hat}")
        return hill_asymptotics(g, _gamma_g_from_alpha(g, p_hat)).variance
    if estimate.estimator_id not in _MOMENT_IDS:
        raise DomainError(f"no plug-in variance for {estimate.estimator_id!r}")
    label = classify_mda(g, CLASSIFICATION_RADIUS)
    if label == "gumbel":
        return moment_zero(p_hat).variance
    if p_hat == 1.0:
        return 1.0 + g * g if label == "frechet" else moment_neg_uncensored_variance(g)
    _require(p_hat > 0.5, "alpha_F > 1/2 (p_hat > 1/2)", f"p_hat = {p_hat}")
    gg = _gamma_g_from_alpha(g, p_hat)
    return moment_pos(g, gg).variance if label == "frechet" else moment_neg(g, gg).variance


def confidence_interval(estimate: EviEstimate, variance: float, level: float = 0.95) -> tuple[float, float]:
    """gamma_hat -/+ z_{(1+level)/2} sqrt(variance / k)."""
    if not 0 < level < 1:
        raise DomainError("confidence level must lie in (0, 1)")
    if variance < 0:
        raise DomainError("variance must be nonnegative")
    if estimate.k < 1:
        raise DomainError("k must be >= 1")
    z = NormalDist().inv_cdf((1.0 + level) / 2.0)
    half = z * math.sqrt(variance / estimate.k)
    return estimate.gamma_hat - half, estimate.gamma_hat + half


def with_confidence_interval(view: TailView, estimate: EviEstimate, level: float = 0.95) -> EviEstimate:
    var = plugin_variance(view, estimate)
    lo, hi = confidence_interval(estimate, var, level)
    return estimate.with_interval(var, lo, hi, level)
