"""Tests for the zonal kernel catalog."""
import math

import numpy as np
import pytest
from scipy.special import gammaln

from errors import DivergentSeries, InvalidFamily, InvalidPerturbation, NotPositiveDefinite
from harmonics import funk_hecke_coefficients, spectral_symbol
from kernel_catalog import (best_poly_error, combine_kernels, kernel_from_name,
                            log_best_poly_error, make_custom, make_gaussian, make_generating,
                            make_green, make_multiquadric, make_tps, make_wendland,
                            min_coeff_profile, lp_kernel_transform, tps_raw_coeff)
from utils import fit_loglog_slope


def test_gaussian_matches_quadrature():
    k = make_gaussian(2, 1.0)
    oracle = funk_hecke_coefficients(k.closed_form, 2, 20, count=256)
    # relative agreement where the coefficient stands above double-precision roundoff
    resolved = oracle > 1e-8 * oracle[0]
    assert resolved[:8].all()
    assert np.allclose(k.coeffs[:21][resolved], oracle[resolved], rtol=1e-7, atol=0)
    assert np.all(np.abs(k.coeffs[:21] - oracle)[~resolved] < 1e-14)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_gaussian_two_sided_bound(sigma):
    n = 2
    k = make_gaussian(n, sigma)
    l = np.arange(51)
    log_upper = (math.log(2.0) + l * math.log(sigma) + 0.5 * (n + 1) * math.log(math.pi)
                 - gammaln(l + 0.5 * (n + 1)))
    log_lower = log_upper - 2.0 * sigma
    assert np.all(k.log_coeffs[:51] >= log_lower - 1e-12)
    assert np.all(k.log_coeffs[:51] <= log_upper + 1e-12)


def test_gaussian_series_reconstructs_closed_form():
    k = make_gaussian(2, 1.0)
    t = np.array([-1.0, 0.0, 1.0])
    assert np.max(np.abs(k.evaluate_series(t, 64) - np.exp(-2.0 * (1.0 - t)))) < 1e-9


@pytest.mark.parametrize("s", [0.5, 1.0])
def test_tps_matches_quadrature(s):
    k = make_tps(2, s, l_max=64)
    for l in (2, 3, 5, 10, 20):
        assert k.coeffs[l] == pytest.approx(tps_raw_coeff(2, s, l), rel=1e-7)
    assert k.poly_cutoff == int(math.floor(s)) + 1


def test_tps_half_matches_gauss_jacobi():
    # -(1 - t)^(1/2): the endpoint factor goes into the Jacobi weight
    k = make_tps(2, 0.5, l_max=64)
    oracle = funk_hecke_coefficients(lambda x: -np.ones_like(x), 2, 20, count=128,
                                     endpoint_power=0.5)
    assert np.allclose(k.coeffs[1:21], oracle[1:], rtol=1e-7, atol=0)


def test_tps_raw_continuation_keeps_polynomial_part():
    k = make_tps(2, 1.0, l_max=32, continuation="raw")
    assert np.all(k.coeffs[:2] == 0.0)
    assert k.raw_poly_coeffs.size == 2
    positive = make_tps(2, 1.0, l_max=32)
    assert np.allclose(positive.coeffs[:2], positive.coeffs[2])


def test_multiquadric_matches_quadrature():
    k = make_multiquadric(2, 1.0, l_max=64)
    oracle = funk_hecke_coefficients(lambda t: -np.sqrt(3.0 - 2.0 * t), 2, 20, count=256)
    assert np.allclose(k.coeffs[1:21], oracle[1:], rtol=1e-7, atol=0)
    # large delta: consecutive ratio tends to (delta^2 + 2)(l + lambda + 1) / (l - 1/2)
    big = make_multiquadric(2, 20.0, l_max=16)
    assert big.coeffs[10] / big.coeffs[11] == pytest.approx(402.0 * 11.5 / 9.5, rel=1e-3)


def test_generating_and_poisson_coefficients():
    k = make_generating(2, 0.5)
    assert k.coeffs[3] == pytest.approx(1 / 8)
    p = kernel_from_name("poisson", 1, w=0.5)
    assert p.coeffs[0] == pytest.approx(1.0)
    assert p.coeffs[2] == pytest.approx(0.5)
    for kern in (k, p):
        assert abs(float(kern.evaluate_series(0.3, 60)) - float(kern.closed_form(0.3))) < 1e-12


def test_wendland_decay_exponent():
    n, d, k_smooth = 2, 6, 0
    k = make_wendland(n, d, k_smooth, l_max=512)
    assert np.all(np.isfinite(k.log_coeffs[:201]))
    l = np.arange(64, 513)
    fit = fit_loglog_slope(spectral_symbol(n, l), k.coeffs[l], weights=np.ones(l.size))
    assert fit.slope == pytest.approx(-(2 * k_smooth + 1 + n), abs=0.15)


def test_wendland_support():
    k = make_wendland(2, 6, 1, t0=0.2, l_max=64)
    assert np.all(k.closed_form(np.array([-1.0, 0.0, 0.2])) == 0.0)
    assert float(k.closed_form(1.0)) == pytest.approx(1.0)


def test_green_profile_is_monotone():
    k = make_green(2, 3.0)
    assert min_coeff_profile(k, 0.0, 10) == pytest.approx(10.5 ** -3)
    assert min_coeff_profile(k, 3.0, 10) == pytest.approx(1.0)
    g = make_gaussian(2, 1.0)
    assert min_coeff_profile(g, 0.0, 10) == pytest.approx(g.coeffs[10])


def test_green_perturbation_validated():
    with pytest.raises(InvalidPerturbation):
        make_green(2, 3.0, psi=[0.0, -1.5])
    k = make_green(2, 3.0, psi=[0.5], l_max=16)
    assert k.coeffs[0] == pytest.approx(1.5 * 0.5 ** -3)


def test_kernel_from_name():
    with pytest.raises(InvalidFamily):
        kernel_from_name("nope", 2)
    with pytest.raises(InvalidFamily):
        kernel_from_name("poisson", 2)
    k = kernel_from_name("gaussian", 2, sigma=1.0, l_max=50)
    assert k.coeffs.size == 51
    assert k.kernel_type == "smooth"
    assert kernel_from_name("green", 2).kernel_type == "green"


def test_combination_must_stay_positive():
    a = make_gaussian(2, 1.0, l_max=32)
    b = make_gaussian(2, 2.0, l_max=32)
    with pytest.raises(NotPositiveDefinite):
        combine_kernels([1.0, -5.0], [a, b])
    both = combine_kernels([1.0, 1.0], [a, b])
    assert both.coeffs[5] == pytest.approx(a.coeffs[5] + b.coeffs[5])
    with pytest.raises(NotPositiveDefinite):
        make_custom(2, [1.0, -1.0])


def test_lp_transform_lowers_green_order():
    k = lp_kernel_transform(make_green(2, 3.0), 1.0)
    assert k.params["beta"] == pytest.approx(2.0)
    assert k.coeffs[4] == pytest.approx(4.5 ** -2)


def test_best_poly_error():
    # G_1 on S^2 is not continuous: its sup-norm tail diverges
    with pytest.raises(DivergentSeries):
        best_poly_error(make_green(2, 1.0), 10, math.inf)
    k = make_gaussian(2, 1.0)
    errs = [best_poly_error(k, L, 1.0) for L in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2] > 0


def test_log_best_poly_error_past_underflow():
    k = make_gaussian(2, 1.0)
    for p in (1.0, 2.0, 3.0, math.inf):
        assert log_best_poly_error(k, 8, p) == pytest.approx(math.log(best_poly_error(k, 8, p)))
    # past l_max the tail follows the decay model from L itself
    assert best_poly_error(k, 600, 2.0) == 0.0
    logs = [log_best_poly_error(k, L, 2.0) for L in (200, 600, 1200)]
    assert all(math.isfinite(v) for v in logs)
    assert logs[0] > logs[1] > logs[2]
