import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from longmem.errors import ConfigurationError, ParameterError
from longmem.rand import (
    Exponential,
    Pareto,
    PositiveStable,
    PositiveStableSampler,
    RngStream,
    StableParams,
    Weibull,
    as_generator,
    sample_pareto,
    sample_positive_stable,
    sample_stable,
    sample_weibull,
)


def hill(x, k):
    """Hill tail-index estimate from the k largest values."""
    top = np.sort(x)[-(k + 1):]
    return 1.0 / np.mean(np.log(top[1:] / top[0]))


# --- streams -----------------------------------------------------------------


def test_stream_reproducible_and_independent():
    a = RngStream(5, 2).generator().random(4)
    b = RngStream(5, 2).generator().random(4)
    c = RngStream(5, 3).generator().random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(RngStream(5, 2).child(0).generator().random(4),
                           RngStream(5, 2).child(1).generator().random(4))


def test_replication_matches_stream_id():
    assert RngStream(9).replication(4) == RngStream(9, 4)


def test_as_generator_rejects_garbage():
    with pytest.raises(TypeError):
        as_generator("seed")


# --- stable ------------------------------------------------------------------


def test_stable_params_validation():
    for bad in [dict(alpha=0), dict(alpha=2.1), dict(alpha=1.5, beta=1.2),
                dict(alpha=1.5, scale=0)]:
        with pytest.raises(ParameterError):
            StableParams(**bad)


def test_gaussian_case_variance_two():
    x = sample_stable(StableParams(2.0, 0.0, 1.0), 1_000_000, 1)
    assert abs(x.var() - 2.0) < 0.02


def test_levy_case_cdf():
    # alpha=1/2, beta=1: P(X <= 1) = 2 (1 - Phi(1))
    x = sample_stable(StableParams(0.5, 1.0, 1.0), 400_000, 2)
    target = 2 * (1 - stats.norm.cdf(1.0))
    assert abs(target - 0.3173) < 1e-4
    assert abs(np.mean(x <= 1.0) - target) < 4 * math.sqrt(target * (1 - target) / x.size)


@pytest.mark.parametrize("alpha,beta", [(1.5, 0.8), (1.0, 0.5), (0.7, -0.3)])
def test_stable_matches_scipy_distribution(alpha, beta):
    x = sample_stable(StableParams(alpha, beta, 1.3, 0.4), 4000, 3)
    law = stats.levy_stable(alpha, beta, loc=0.4, scale=1.3)
    res = stats.kstest(x, law.cdf)
    assert res.statistic < 2 / math.sqrt(x.size)


def test_stable_tail_ratio():
    x = sample_stable(StableParams(1.5, 0.8), 4_000_000, 4)
    q = np.quantile(x, 0.999)
    ratio = np.mean(x > 2 * q) / np.mean(x > q)
    assert abs(ratio - 2**-1.5) < 0.04


def test_positive_stable_support_and_tail():
    p = StableParams(1.5, 1.0)
    assert np.all(sample_positive_stable(p, 100_000, 5) > 0)
    y = sample_positive_stable(StableParams(1.5, 0.8), 2_000_000, 6)
    assert abs(hill(y, 2000) - 1.5) < 0.12


def test_positive_stable_acceptance_rate():
    _, rate = sample_positive_stable(StableParams(1.5, 0.8), 50_000, 7, return_rate=True)
    # P(X > 0) for S_1.5(1, 0.8, 0)
    exact = stats.levy_stable(1.5, 0.8).sf(0.0)
    assert abs(rate - exact) < 0.01


def test_positive_stable_multiplier_is_linear():
    p = StableParams(1.5, 0.8)
    a = sample_positive_stable(p, 1000, 8)
    b = sample_positive_stable(p, 1000, 8, multiplier=1.21)
    np.testing.assert_allclose(b, 1.21 * a)
    assert math.isclose(b.mean(), 1.21 * a.mean())


def test_positive_stable_rejects_insufficient_skew():
    with pytest.raises(ConfigurationError):
        # alpha < 1, beta = -1 is supported on the negative half-line
        PositiveStableSampler(StableParams(0.7, -1.0), 9)


def test_positive_stable_mean_matches_samples():
    law = PositiveStable(StableParams(1.5, 0.8), 1.21)
    draws = law.sample(1_000_000, 10)
    # infinite variance, so the sample mean converges slowly (error ~ n^(-1/3))
    assert abs(draws.mean() / law.mean() - 1) < 0.05
    assert 2.8 < law.mean() < 3.1


# --- Weibull ------------------------------------------------------------------


def test_weibull_exponential_case():
    x = sample_weibull(1.0, 1.0, 400_000, 11)
    assert abs(x.mean() - 1.0) < 4 / math.sqrt(x.size)


def test_weibull_mean_gamma_function():
    g = 1.3376
    x = sample_weibull(g, 1.0, 400_000, 12)
    mu = special.gamma(1 + 1 / g)
    sd = math.sqrt(special.gamma(1 + 2 / g) - mu**2)
    assert abs(x.mean() - mu) < 4 * sd / math.sqrt(x.size)


def test_weibull_unit_mean():
    x = sample_weibull(1.3376, count=400_000, rng=13, unit_mean=True)
    assert abs(x.mean() - 1.0) < 0.005
    assert math.isclose(Weibull.unit_mean(1.3376).mean(), 1.0)


def test_weibull_rejects_bad_shape():
    with pytest.raises(ParameterError):
        sample_weibull(0.0, 1.0, 10, 1)


# --- Pareto -------------------------------------------------------------------


def test_pareto_median_and_mean():
    assert math.isclose(Pareto(1.5).isf(0.5), 2 ** (1 / 1.5))
    assert math.isclose(2 ** (1 / 1.5), 1.5874, abs_tol=1e-4)
    x = sample_pareto(1.5, 1.0, 1_000_000, 14)
    assert abs(np.median(x) - 1.5874) < 0.01
    assert Pareto(1.5).mean() == 3.0
    # infinite variance: use a generous band around the mean
    assert 2.6 < x.mean() < 3.4


def test_pareto_equilibrium_tail_index():
    x = sample_pareto(1.5, 1.0, 2_000_000, 15, equilibrium=True)
    assert abs(hill(x, 5000) - 0.5) < 0.05


def test_pareto_equilibrium_cdf():
    # equilibrium density is P(eta > x) / E[eta]
    law = Pareto(1.5)
    x = law.sample_equilibrium(200_000, 16)
    for q in [0.5, 2.0, 10.0]:
        cdf = q / 3 if q < 1 else 1 - law.excess_mean(q) / law.mean()
        assert abs(np.mean(x <= q) - cdf) < 0.005


def test_pareto_excess_mean_quadrature():
    from scipy import integrate

    law = Pareto(1.5, 2.0)
    for t in [0.5, 3.0, 20.0]:
        num, _ = integrate.quad(lambda s: law.survival(s), t, np.inf, limit=200)
        assert math.isclose(law.excess_mean(t), num, rel_tol=1e-6)


@given(st.floats(1.05, 3.0), st.floats(0.1, 5.0), st.floats(0.0, 50.0))
@settings(max_examples=50, deadline=None)
def test_excess_mean_decreasing_and_bounded(alpha, xm, t):
    law = Pareto(alpha, xm)
    e = law.excess_mean(t)
    assert 0 < e <= law.mean() + 1e-12
    assert law.excess_mean(t + 1.0) <= e


def test_exponential_length_biased_mean():
    law = Exponential(2.0)
    x = law.sample_length_biased(200_000, 17)
    # E[length-biased] = E[eta^2] / E[eta] = 2 mu
    assert abs(x.mean() - 4.0) < 0.05
