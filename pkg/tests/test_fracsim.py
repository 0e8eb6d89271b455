import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from longmem.errors import EmbeddingWarning, NumericalError, ParameterError
from longmem.fracsim import (
    AcvfTable,
    FracSpec,
    arfima0d0_acvf,
    arfima_acvf,
    circulant_size,
    ma_inf_weights,
    simulate_arfima,
    simulate_fractional_noise,
)
from longmem.rand import RngStream


def spectral_acvf(d, ar, lag, sigma=1.0):
    """gamma(lag) = 2 int_0^pi f(w) cos(lag w) dw by quadrature."""
    def f(w):
        frac = (2 * math.sin(w / 2)) ** (-2 * d)
        arma = abs(1 - sum(a * np.exp(-1j * (k + 1) * w) for k, a in enumerate(ar))) ** -2
        return sigma**2 / (2 * math.pi) * frac * arma * math.cos(lag * w)

    val, _ = integrate.quad(f, 0, math.pi, limit=500, points=[1e-6, 1e-3])
    return 2 * val


def sample_acf(x, k):
    y = x - x.mean()
    return np.sum(y[:-k] * y[k:]) / np.sum(y * y)


def test_white_noise_case():
    g = arfima0d0_acvf(0.0, 10, 2.0).values
    assert g[0] == pytest.approx(4.0)
    np.testing.assert_array_equal(g[1:], 0.0)


@given(st.floats(-0.49, 0.49).filter(lambda d: abs(d) > 1e-6), st.integers(1, 500))
@settings(max_examples=60, deadline=None)
def test_acvf_recursion(d, k):
    g = arfima0d0_acvf(d, k).values
    assert g[k] / g[k - 1] == pytest.approx((k - 1 + d) / (k - d), rel=1e-12)


def test_acvf_variance_matches_quadrature():
    for d in (-0.3, 0.1, 0.3545):
        g0 = arfima0d0_acvf(d, 0).values[0]
        assert g0 == pytest.approx(special.gamma(1 - 2 * d) / special.gamma(1 - d) ** 2)
        assert g0 == pytest.approx(spectral_acvf(d, [], 0), rel=1e-6)


def test_acvf_hyperbolic_slope():
    g = arfima0d0_acvf(0.25, 1000).values
    k = np.arange(100, 1001)
    slope = np.polyfit(np.log(k), np.log(g[k]), 1)[0]
    assert abs(slope - (-0.5)) < 0.02


def test_acvf_rejects_bad_d():
    with pytest.raises(ParameterError):
        arfima0d0_acvf(0.5, 10)
    with pytest.raises(ParameterError):
        FracSpec(-0.6)


def test_nonstationary_ar_rejected():
    with pytest.raises(ParameterError):
        FracSpec(0.2, ar=(1.1,))


def test_circulant_size():
    assert circulant_size(2) == 2
    assert circulant_size(1000) == 2048
    assert circulant_size(1025) == 2048
    assert circulant_size(1026) == 4096


def test_iid_case_lag_one():
    x = simulate_fractional_noise(arfima0d0_acvf(0.0, 1), 4096, 1)
    assert abs(sample_acf(x, 1)) < 3 / math.sqrt(4096)


def test_sample_covariance_matches_acvf():
    d = 0.3545
    acvf = arfima0d0_acvf(d, 20)
    x = simulate_fractional_noise(acvf, 64, RngStream(2), size=20_000)
    emp = np.mean(x[:, 0:1] * x[:, :21], axis=0)
    np.testing.assert_allclose(emp, acvf.values, atol=0.05)


def test_sample_variance_near_gamma0():
    d = 0.3545
    acvf = arfima0d0_acvf(d, 0)
    x = simulate_fractional_noise(acvf, 8192, RngStream(3), size=200)
    # mean of the per-path sample variance about the known zero mean
    v = np.mean(x**2)
    assert abs(v / acvf.values[0] - 1) < 0.02


def test_partial_sum_variance_scaling():
    d = 0.25
    x = simulate_fractional_noise(arfima0d0_acvf(d, 0), 2**14, RngStream(4), size=50)
    lengths = np.unique(np.geomspace(16, 2048, 8).astype(int))
    v = [np.mean(np.sum(x[:, :ell], axis=1) ** 2) for ell in lengths]
    slope = np.polyfit(np.log(lengths), np.log(v), 1)[0]
    assert abs(slope - (2 * d + 1)) < 0.1


def test_size_rows_are_independent():
    x = simulate_fractional_noise(arfima0d0_acvf(0.2, 0), 128, 5, size=2000)
    c = np.corrcoef(x[:1000, 5], x[1000:, 5])[0, 1]
    assert abs(c) < 0.1


def test_indefinite_embedding_raises():
    bad = AcvfTable(np.r_[1.0, 0.99, -0.99, np.zeros(100)], 0.0, _extendable=False)
    with pytest.raises(NumericalError):
        simulate_fractional_noise(bad, 64, 1)


def test_tiny_negative_eigenvalues_clip_with_warning():
    # sharp cut-off of a smooth covariance leaves ripple at ~1e-10 level
    lags = np.arange(200)
    g = np.exp(-0.5 * (lags / 12.0) ** 2)
    table = AcvfTable(g, 0.0, _extendable=False)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        try:
            simulate_fractional_noise(table, 128, 1)
        except NumericalError:
            pytest.skip("ripple larger than the clipping threshold on this platform")
    assert all(issubclass(w.category, EmbeddingWarning) for w in rec)


def test_no_arma_terms_equals_fractional_noise():
    spec = FracSpec(0.3)
    a = simulate_arfima(spec, 1000, RngStream(6))
    b = simulate_fractional_noise(arfima0d0_acvf(0.3, 0), 1000, RngStream(6))
    np.testing.assert_array_equal(a, b)


def test_ma_inf_weights_ar1():
    np.testing.assert_allclose(ma_inf_weights((0.5,), (), 6), 0.5 ** np.arange(6))


def test_arfima_acvf_against_spectral_integral():
    spec = FracSpec(0.3545, ar=(-0.42,))
    g = arfima_acvf(spec, 3)
    for k in range(4):
        assert g[k] == pytest.approx(spectral_acvf(0.3545, [-0.42], k), rel=1e-5)
    assert g[0] == pytest.approx(1.2655, abs=1e-3)


def test_arfima_lag_one_autocorrelation():
    spec = FracSpec(0.3545, ar=(-0.42,))
    rho1 = spectral_acvf(0.3545, [-0.42], 1) / spectral_acvf(0.3545, [-0.42], 0)
    x = simulate_arfima(spec, 4096, RngStream(7), size=200)
    # the mean is known to be zero; centring on the sample mean would bias
    # the lag-1 autocorrelation down by O(n^(2d-1))
    r = np.sum(x[:, :-1] * x[:, 1:], axis=1) / np.sum(x**2, axis=1)
    assert abs(r.mean() - rho1) < 4 * r.std() / math.sqrt(r.size)


def test_ar1_reduction():
    x = simulate_arfima(FracSpec(0.0, ar=(0.5,)), 200_000, 8)
    for k in range(1, 6):
        assert sample_acf(x, k) == pytest.approx(0.5**k, abs=0.01)


def test_zero_innovation_sd_gives_zero_series():
    np.testing.assert_array_equal(simulate_arfima(FracSpec(0.2, innovation_sd=0.0), 50, 1), 0.0)
