"""Tests for positive-weight quadrature and norms on the sphere."""
import math

import numpy as np
import pytest

from errors import InfeasibleMoments, UnsupportedDimension, ValidationError
from frames import BandKernel, make_envelope
from harmonics import PolynomialOnSphere
from quadrature import (build_rule, build_rule_with_backoff, lp_norm_on_grid, mz_discrepancy,
                        mz_ratio, offdiag_kernel_sum, zonal_lp_norm)
from sphere_geometry import (analyze_centers, build_cells, equispaced_circle, fibonacci_sphere,
                             octahedron, sphere_volume, uniform_random)


@pytest.mark.parametrize("n,points,L", [
    (2, fibonacci_sphere(400), 12),
    (1, equispaced_circle(64), 63),
])
def test_rule_is_positive_and_exact(n, points, L):
    cs = analyze_centers(n, points)
    rule = build_rule(cs, L)
    assert np.all(rule.weights > 0)
    assert rule.exactness_residual < 1e-9
    rng = np.random.default_rng(11)
    check = uniform_random(n, 2000, rng)
    for _ in range(5):
        S = PolynomialOnSphere.random(n, L, rng)
        exact = S.coeffs[0] * math.sqrt(sphere_volume(n))
        sup = max(np.max(np.abs(S.evaluate(check))), np.max(np.abs(S.evaluate(cs.points))))
        assert abs(rule.integrate(S.evaluate(cs.points)) - exact) < 1e-8 * sup


def test_equispaced_rule_is_trapezoid():
    cs = analyze_centers(1, equispaced_circle(32))
    rule = build_rule(cs, 20)
    assert np.allclose(rule.weights, 2 * math.pi / 32, atol=1e-12)
    cert = rule.certificate()
    assert cert["N"] == 32 and cert["degree"] == 20


def test_strict_feasibility_raises():
    cs = analyze_centers(2, fibonacci_sphere(50))
    with pytest.raises(InfeasibleMoments):
        build_rule(cs, 6, strict=True)


def test_more_moments_than_centers_rejected():
    cs = analyze_centers(1, equispaced_circle(8))
    with pytest.raises(ValidationError):
        build_rule_with_backoff(cs, 12)
    with pytest.raises(ValidationError):
        build_rule(analyze_centers(2, fibonacci_sphere(20)), 4)


def test_inconsistent_moments_raise():
    # harmonics of degree 2 restricted to the equator are not independent of constants
    angles = 2 * np.pi * np.arange(12) / 12
    equator = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(12)])
    cs = analyze_centers(2, equator)
    with pytest.raises(InfeasibleMoments):
        build_rule(cs, 2, anchor_method="grid")


def test_backoff_returns_rule_at_feasible_degree():
    cs = analyze_centers(2, fibonacci_sphere(200))
    rule = build_rule_with_backoff(cs, 8)
    assert rule.degree_L <= 8
    assert np.all(rule.weights > 0)


def test_quadrature_limited_to_low_dimension():
    cs = analyze_centers(3, uniform_random(3, 30, np.random.default_rng(0)))
    with pytest.raises(UnsupportedDimension):
        build_rule(cs, 2)


def test_norms_of_constants():
    assert zonal_lp_norm(lambda t: np.ones_like(t), 2, 2.0) == pytest.approx(math.sqrt(4 * math.pi))
    assert zonal_lp_norm(lambda t: t, 2, math.inf) == pytest.approx(1.0)
    one = lambda pts: np.ones(len(pts))
    assert lp_norm_on_grid(one, 1, 1.0, 4) == pytest.approx(2 * math.pi)
    assert lp_norm_on_grid(one, 2, 2.0, 4) == pytest.approx(math.sqrt(4 * math.pi))


def test_mz_ratio_near_one_on_fine_cells():
    cs = analyze_centers(2, fibonacci_sphere(2000))
    cells = build_cells(cs)
    S = PolynomialOnSphere.random(2, 4, np.random.default_rng(5))
    assert mz_ratio(S, cells) == pytest.approx(1.0, abs=0.1)


def test_mz_discrepancy_small_for_wide_kernel():
    cs = analyze_centers(2, fibonacci_sphere(400))
    cells = build_cells(cs)
    band = BandKernel(make_envelope("lowpass"), min(1.0, 8 * cs.sep_radius_q), 2)
    gap = mz_discrepancy(band, cells, [0.0, 0.0, 1.0])
    assert gap < 0.25 * band.l1_norm()


def test_offdiag_kernel_sum_matches_direct_sum():
    cs = analyze_centers(2, octahedron())
    band = BandKernel(make_envelope("bump"), 0.25, 2)
    gram = np.clip(cs.points @ cs.points.T, -1, 1)
    vals = np.abs(band.evaluate(gram))
    np.fill_diagonal(vals, 0.0)
    assert offdiag_kernel_sum(band, cs) == pytest.approx(np.max(vals.sum(axis=1)), rel=1e-6)
