import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from censored_extremes.distributions import (
    GPD,
    Beta,
    Burr,
    Exponential,
    Frechet,
    Pareto,
    Weibull,
    cdf,
    parse_distribution,
    quantile,
    sample,
    true_tail_profile,
)
from censored_extremes.errors import ConfigError, DomainError

ALL = [
    Pareto(2),
    Burr(math.sqrt(2), math.sqrt(2)),
    Frechet(2),
    Beta(1, 2),
    Beta(2, 3),
    Weibull(0.5, 1),
    Exponential(6),
    GPD(0.5, 0, 1),
    GPD(-0.25, 1, 2),
    GPD(0.0, 0, 3),
]


class TestCdfQuantile:
    def test_pareto_cdf(self):
        assert cdf(Pareto(2), 2) == pytest.approx(0.75, abs=1e-15)

    def test_beta_cdf(self):
        assert cdf(Beta(1, 2), 0.5) == pytest.approx(0.75, abs=1e-15)

    def test_burr_cdf_at_one(self):
        # survival (1 + 1)^(-sqrt 2)
        assert cdf(Burr(math.sqrt(2), math.sqrt(2)), 1.0) == pytest.approx(1 - 2 ** -math.sqrt(2), rel=1e-14)

    def test_quantiles(self):
        assert quantile(Pareto(2), 0.75) == pytest.approx(2.0, rel=1e-14)
        assert quantile(Exponential(1), 1 - math.exp(-1)) == pytest.approx(1.0, rel=1e-14)
        assert quantile(Frechet(2), math.exp(-1)) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_outside_open_interval(self, p):
        with pytest.raises(DomainError):
            Pareto(2).quantile(p)

    @pytest.mark.parametrize("dist", ALL, ids=lambda d: d.literal())
    def test_quantile_inverts_cdf(self, dist):
        p = np.linspace(0.01, 0.99, 99)
        x = dist.quantile(p)
        np.testing.assert_allclose(dist.cdf(x), p, rtol=1e-10)

    @pytest.mark.parametrize("dist", ALL, ids=lambda d: d.literal())
    def test_cdf_limits_and_monotone(self, dist):
        x = np.sort(np.r_[dist.quantile(np.linspace(1e-6, 1 - 1e-6, 500)), -1e9, 1e300])
        f = dist.cdf(x)
        assert np.all(np.diff(f) >= 0)
        assert f[0] == 0.0
        assert f[-1] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("dist", ALL, ids=lambda d: d.literal())
    def test_survival_complements_cdf(self, dist):
        x = dist.quantile(np.linspace(0.01, 0.99, 25))
        np.testing.assert_allclose(dist.survival(x) + dist.cdf(x), 1.0, rtol=1e-13)

    def test_beta_general_shape_against_scipy(self):
        from scipy import stats

        x = np.linspace(0.05, 0.95, 19)
        np.testing.assert_allclose(Beta(2, 3).cdf(x), stats.beta(2, 3).cdf(x), rtol=1e-12)


class TestSampling:
    def test_deterministic(self):
        a = sample(Pareto(2), np.random.default_rng(7), 5)
        b = sample(Pareto(2), np.random.default_rng(7), 5)
        np.testing.assert_array_equal(a, b)

    def test_pareto_sup_distance(self, rng):
        x = np.sort(sample(Pareto(2), rng, 100_000))
        ecdf = np.arange(1, x.size + 1) / x.size
        assert np.max(np.abs(ecdf - Pareto(2).cdf(x))) < 0.01

    def test_beta_support(self, rng):
        assert sample(Beta(1, 2), rng, 100_000).max() < 1

    def test_inverse_transform_uses_uniform_stream(self):
        u = np.random.default_rng(3).random(4)
        x = Exponential(2).sample(np.random.default_rng(3), 4)
        np.testing.assert_allclose(x, -np.log1p(-u) / 2, rtol=1e-15)

    def test_bad_size(self, rng):
        with pytest.raises(ConfigError):
            Pareto(2).sample(rng, 0)


class TestTailProfile:
    def test_beta(self):
        tp = true_tail_profile(Beta(1, 2))
        assert (tp.gamma, tp.right_endpoint) == (-0.5, 1.0)

    def test_burr_inverse_product(self):
        c = 1 / math.sqrt(3)
        assert true_tail_profile(Burr(c, c)).gamma == pytest.approx(3.0, rel=1e-14)

    @pytest.mark.parametrize(
        "dist,gamma",
        [(Pareto(4), 0.25), (Frechet(2), 0.5), (Burr(2, 3), 1 / 6), (Weibull(0.5, 1), 0.0), (Exponential(6), 0.0)],
    )
    def test_gamma(self, dist, gamma):
        assert dist.tail_profile().gamma == pytest.approx(gamma, rel=1e-14)

    def test_exponential_pair_alpha(self):
        f, g = Exponential(6).tail_profile(), Exponential(1).tail_profile()
        assert f.alpha_pair(g) == pytest.approx(6 / 7, rel=1e-14)
        assert f.alpha_pair(g) + g.alpha_pair(f) == pytest.approx(1.0, abs=1e-15)

    def test_heavy_pair_alpha(self):
        f, g = Pareto(2).tail_profile(), Pareto(2 / 3).tail_profile()
        assert f.alpha_pair(g) == pytest.approx(0.75, rel=1e-14)

    def test_weibull_shapes_decide(self):
        # lighter events (larger shape) drive the tail of min(X, Y): never censored there
        f, g = Weibull(1, 1).tail_profile(), Weibull(0.5, 1).tail_profile()
        assert f.alpha_pair(g) == 1.0
        assert g.alpha_pair(f) == 0.0

    def test_endpoint_decides(self):
        assert Beta(1, 2).tail_profile().alpha_pair(Pareto(2).tail_profile()) == 1.0

    @pytest.mark.parametrize("dist", [Pareto(2), Frechet(0.5), Burr(1.5, 2)], ids=lambda d: d.literal())
    @pytest.mark.parametrize("t", [1e3, 1e6])
    def test_regular_variation(self, dist, t):
        ratio = dist.survival(2 * t) / dist.survival(t)
        target = 2 ** (-1 / dist.tail_profile().gamma)
        assert ratio == pytest.approx(target, rel=0.05)

    @pytest.mark.parametrize("x", [1.0, 1.5, 10.0, 1e4, 1e8])
    def test_exponential_pair_tail_identity(self, x):
        # min(Exp(6), Exp(1)) is Exp(7), so U_H(x) = log(x) / 7
        u_h = math.log(x) / 7
        assert 1 - Exponential(6).cdf(u_h) == pytest.approx(x ** (-6 / 7), rel=1e-10)


class TestLiterals:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("pareto(2)", Pareto(2)),
            ("burr(1.4142,1.4142)", Burr(1.4142, 1.4142)),
            ("beta(1,2)", Beta(1, 2)),
            ("weibull(0.5,1)", Weibull(0.5, 1)),
            ("exp(6)", Exponential(6)),
            ("frechet(2)", Frechet(2)),
            ("gpd(0.5,0,1)", GPD(0.5, 0, 1)),
        ],
    )
    def test_parse(self, text, expected):
        assert parse_distribution(text) == expected

    @pytest.mark.parametrize("dist", ALL, ids=lambda d: d.literal())
    def test_literal_round_trip(self, dist):
        assert parse_distribution(dist.literal()) == dist

    @pytest.mark.parametrize("text", ["pareto", "pareto(a)", "cauchy(1)", "beta(1)", "pareto(-1)"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_distribution(text)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(0.2, 10),
    p=st.floats(1e-6, 1 - 1e-6),
)
def test_pareto_round_trip_property(a, p):
    d = Pareto(a)
    assert d.cdf(d.quantile(p)) == pytest.approx(p, rel=1e-10, abs=1e-15)
