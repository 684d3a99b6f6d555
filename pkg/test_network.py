"""Tests for SBF networks, interpolation and stability."""
import math

import numpy as np
import pytest
from scipy.linalg import eigvalsh

from errors import ConditionFailed, DegreeOverflow, SearchBudgetExhausted, ValidationError
from frames import make_envelope
from harmonics import PolynomialOnSphere, degree_offsets
from harness import nested_sets
from kernel_catalog import make_custom, make_gaussian, make_green
from network import (SbfNetwork, calibrate_epsilon_factor, convolve_poly, diagonal_dominance,
                     frame_degree_limit, frame_degree_requirement, green_fredholm_solve,
                     harmonic_coefficients, interpolate, inv_convolve_poly, inverse_norm_ratio,
                     kernel_matrix, l2_gram, network_bernstein_ratios, projection_distance,
                     quasi_interpolate, smoothed_matrix, stability_ratio)
from quadrature import build_rule
from sphere_geometry import (analyze_centers, equispaced_circle, fibonacci_sphere, octahedron,
                             refine_nested)
from utils import fit_loglog_slope


def test_interpolation_reproduces_data():
    cs = analyze_centers(2, fibonacci_sphere(50))
    y = np.random.default_rng(4).standard_normal(cs.size)
    net = interpolate(make_gaussian(2, 8.0), cs, y)
    assert np.max(np.abs(net.evaluate(cs.points) - y)) < 1e-8 * np.max(np.abs(y))
    record = net.to_dict("centers.txt")
    assert len(record["coeffs"]) == 50
    assert record["centers_file"] == "centers.txt"


def test_interpolation_checks_sizes():
    cs = analyze_centers(2, fibonacci_sphere(10))
    with pytest.raises(ValidationError):
        interpolate(make_gaussian(2, 8.0), cs, np.zeros(9))
    with pytest.raises(ValidationError):
        SbfNetwork(make_gaussian(2, 8.0), cs, np.zeros(3))


def test_network_is_linear_in_coefficients():
    cs = analyze_centers(1, equispaced_circle(12))
    k = make_gaussian(1, 2.0)
    a = np.random.default_rng(1).uniform(-1, 1, 12)
    pts = equispaced_circle(7)
    net = SbfNetwork(k, cs, a)
    expected = k.evaluate(np.clip(pts @ cs.points.T, -1, 1)) @ a
    assert np.allclose(net.evaluate(pts), expected)
    assert net.coefficient_norm(1.0) == pytest.approx(np.sum(np.abs(a)))
    A = kernel_matrix(k, cs)
    assert np.allclose(A, A.T)
    assert np.allclose(np.diag(A), float(k.evaluate(1.0)))


def test_stability_lower_bound_is_gram_eigenvalue():
    cs = analyze_centers(2, fibonacci_sphere(100))
    k = make_gaussian(2, 8.0)
    report = stability_ratio(k, cs, 2.0)
    lam = float(eigvalsh(l2_gram(k, cs))[0])
    assert report.lower_bound == pytest.approx(lam ** -0.5, rel=1e-6)
    assert report.upper_bound >= report.lower_bound
    assert not report.exhausted


def test_network_bernstein_slope():
    base = analyze_centers(1, equispaced_circle(16))
    sets = refine_nested(base, 2)
    rows = network_bernstein_ratios(make_green(1, 3.0), sets, 1.0, 2.0, 16,
                                    np.random.default_rng(2))
    fit = fit_loglog_slope([r["inv_q"] for r in rows], [r["max_ratio"] for r in rows])
    assert fit.slope <= 1.25
    assert all(r["max_ratio"] > 0 for r in rows)


def test_quasi_interpolation_reproduces_polynomials():
    cs = analyze_centers(1, equispaced_circle(64))
    rule = build_rule(cs, 63)
    k = make_gaussian(1, 1.0)
    rng = np.random.default_rng(3)
    # degree 4 needs exactness 32 under the frame accounting
    S = PolynomialOnSphere.random(1, 4, rng)
    assert rule.degree_L >= frame_degree_requirement(1, 4)
    net = quasi_interpolate(k, rule, S)
    pts = equispaced_circle(200)
    vals = S.evaluate(pts)
    assert np.max(np.abs(net.evaluate(pts) - vals)) < 1e-8 * np.max(np.abs(vals))


def test_quasi_interpolation_needs_exact_rule():
    cs = analyze_centers(1, equispaced_circle(32))
    rule = build_rule(cs, 10)
    S = PolynomialOnSphere.random(1, 6, np.random.default_rng(0))
    with pytest.raises(DegreeOverflow):
        quasi_interpolate(make_gaussian(1, 1.0), rule, S)


def test_quasi_interpolation_relaxed_accounting():
    cs = analyze_centers(1, equispaced_circle(64))
    rule = build_rule(cs, 20)
    k = make_gaussian(1, 1.0)
    S = PolynomialOnSphere.random(1, 6, np.random.default_rng(5))
    assert frame_degree_requirement(1, 6) == 64
    assert frame_degree_limit(1, 20) == 2
    with pytest.raises(DegreeOverflow):
        quasi_interpolate(k, rule, S)
    net = quasi_interpolate(k, rule, S, relaxed=True)
    pts = equispaced_circle(200)
    vals = S.evaluate(pts)
    assert np.max(np.abs(net.evaluate(pts) - vals)) < 1e-8 * np.max(np.abs(vals))


def test_green_fredholm_scales_by_nu_beta():
    coeffs = np.zeros(9)
    coeffs[1:4] = 1.0
    S = PolynomialOnSphere(2, 2, coeffs)
    T = green_fredholm_solve(2.0, [0.0, 1.0], S)
    offsets = degree_offsets(2, 2)
    assert np.allclose(T.coeffs[offsets[1]:offsets[2]], 1.5 ** 2 / 2.0)


def test_diagonal_dominance_of_identity():
    dom = diagonal_dominance(np.eye(4))
    assert dom.ratio == 0.0
    assert dom.inverse_bound == pytest.approx(1.0)
    assert math.isinf(diagonal_dominance(-np.eye(2)).ratio)


def test_convolution_round_trip():
    k = make_gaussian(2, 2.0)
    S = PolynomialOnSphere.random(2, 5, np.random.default_rng(6))
    back = inv_convolve_poly(k, convolve_poly(k, S))
    assert np.allclose(back.coeffs, S.coeffs, rtol=1e-10)


def test_harmonic_coefficients_of_band_limited_network():
    k = make_custom(2, [1.0, 0.5, 0.25])
    cs = analyze_centers(2, octahedron())
    net = SbfNetwork(k, cs, np.arange(1.0, 7.0))
    pts = fibonacci_sphere(30)
    assert np.allclose(harmonic_coefficients(net, 2).evaluate(pts), net.evaluate(pts))


def test_projection_distance():
    k = make_custom(2, [1.0, 0.5, 0.25])
    cs = analyze_centers(2, octahedron())
    dist, best = projection_distance(k, cs, [1.0, 0.5, 0.25], cs.points[0])
    assert dist < 1e-6
    assert best.coeffs_a[0] == pytest.approx(1.0, abs=1e-6)
    # degree 3 is orthogonal to the span
    dist, _ = projection_distance(k, cs, [0.0, 0.0, 0.0, 1.0], cs.points[0])
    assert dist == pytest.approx(math.sqrt(7 / (4 * math.pi)))


def test_inverse_norm_ratio():
    cs = analyze_centers(2, fibonacci_sphere(50))
    out = inverse_norm_ratio(make_gaussian(2, 8.0), cs, 1.0)
    assert out["L"] == int(math.floor(2 / cs.sep_radius_q - 0.5))
    assert 0 < out["ratio"] < math.inf


def test_strict_stability_search_budget():
    cs = analyze_centers(1, equispaced_circle(12))
    k = make_gaussian(1, 4.0)
    report = stability_ratio(k, cs, 1.0, search_budget=3, with_upper=False)
    assert report.exhausted
    with pytest.raises(SearchBudgetExhausted):
        stability_ratio(k, cs, 1.0, search_budget=3, with_upper=False, strict=True)


def test_interpolation_recovers_known_coefficients():
    cs = analyze_centers(2, fibonacci_sphere(100))
    k = make_gaussian(2, 20.0)
    a = np.random.default_rng(7).uniform(-1, 1, cs.size)
    y = kernel_matrix(k, cs) @ a
    net = interpolate(k, cs, y)
    assert np.max(np.abs(net.coeffs_a - a)) < 1e-6 * np.max(np.abs(a))


def test_smoothing_inside_the_flat_band_keeps_the_matrix():
    # lowpass is 1 on [0, 1] and eps nu(l) <= 0.625 for l <= 2
    k = make_custom(2, [1.0, 0.5, 0.25])
    cs = analyze_centers(2, octahedron())
    system = smoothed_matrix(k, cs, make_envelope("lowpass"), 0.25)
    assert np.allclose(system.matrix_A, kernel_matrix(k, cs), atol=1e-12)


def test_calibrated_smoothing_bounds_the_inverse():
    cs = analyze_centers(2, fibonacci_sphere(40))
    k = make_green(2, 3.0)
    kappa = make_envelope("bump_high")
    c = calibrate_epsilon_factor(k, cs, kappa)
    system = smoothed_matrix(k, cs, kappa, min(1.0, c * cs.sep_radius_q))
    dom = diagonal_dominance(system.matrix_A)
    assert dom.ratio <= 0.5
    direct = float(np.max(np.sum(np.abs(np.linalg.inv(system.matrix_A)), axis=0)))
    assert direct == pytest.approx(system.cond_estimates["norm1_inv"], rel=1e-9)
    assert direct <= dom.inverse_bound * (1 + 1e-9)
    with pytest.raises(ConditionFailed):
        calibrate_epsilon_factor(k, cs, kappa, candidates=(4.0,), target=1e-12)


def test_lowpass_smoothing_cannot_raise_lambda_min():
    cs = analyze_centers(2, fibonacci_sphere(50))
    k = make_gaussian(2, 8.0)
    lam = eigvalsh(kernel_matrix(k, cs))
    system = smoothed_matrix(k, cs, make_envelope("lowpass"), 0.05)
    # A - A_eps is a positive semidefinite Gram matrix
    assert lam[0] >= system.cond_estimates["lambda_min"] - 1e-10 * lam[-1]


def test_network_bernstein_slope_on_the_two_sphere():
    sets = nested_sets(2, 12, 3)
    rows = network_bernstein_ratios(make_green(2, 3.0), sets, 1.0, 2.0, 64,
                                    np.random.default_rng(8))
    assert all(cs.mesh_ratio_rho <= 2.5 for cs in sets[1:])
    fit = fit_loglog_slope([r["inv_q"] for r in rows], [r["max_ratio"] for r in rows])
    assert fit.slope <= 1.25


@pytest.mark.parametrize("kernel", [make_green(2, 3.0), make_gaussian(2, 8.0)],
                         ids=["green", "gaussian"])
def test_stability_interval_is_ordered_under_refinement(kernel):
    for cs in nested_sets(2, 20, 2):
        report = stability_ratio(kernel, cs, 2.0)
        assert report.upper_bound >= report.lower_bound
