"""Tests for frame masks, B_J and band kernels."""
import math

import numpy as np
import pytest

from errors import DivergentSeries, ValidationError
from frames import (BandKernel, Envelope, FrameOperatorSpec, apply_B_J, band_kernel, build_mask,
                    dimension_shift, frame_error_bound, frame_multiplier, make_envelope,
                    poly_bernstein_ratios, poly_nikolskii_ratios, ratio_slope)
from harmonics import PolynomialOnSphere
from kernel_catalog import make_gaussian, make_green
from sphere_geometry import uniform_random


@pytest.mark.parametrize("k", [None, 5])
def test_mask_partition_of_unity(k):
    assert build_mask(k).partition_error() < 1e-12


def test_mask_smoothness_floor():
    with pytest.raises(ValidationError):
        build_mask(2)


def test_dimension_shift():
    assert dimension_shift(1) == 0
    assert dimension_shift(2) == -1
    assert dimension_shift(3) == 0


@pytest.mark.parametrize("n", [1, 2])
def test_B_J_reproduces_low_degrees(n):
    spec = FrameOperatorSpec(build_mask(), 5, n)
    rng = np.random.default_rng(7)
    pts = uniform_random(n, 64, rng)
    worst = 0.0
    for _ in range(100):
        S = PolynomialOnSphere.random(n, spec.reproduction_degree, rng)
        out = apply_B_J(spec, S)
        worst = max(worst, float(np.max(np.abs(out.evaluate(pts) - S.evaluate(pts)))))
    assert worst < 1e-8


def test_B_J_telescopes_into_frame_levels():
    fine = FrameOperatorSpec(build_mask(), 4, 2)
    coarse = FrameOperatorSpec(build_mask(), 3, 2)
    top = fine.degree
    diff = fine.multiplier(top) - coarse.multiplier(top)
    assert np.allclose(frame_multiplier(fine, 4, top), diff, atol=1e-14)
    assert np.all(fine.multiplier(top + 5)[top + 1:] == 0.0)


def test_band_kernel_decay_is_uniform_in_eps():
    kappa = make_envelope("bump")
    consts = [BandKernel(kappa, eps, 2).decay_constant(6) for eps in (1 / 8, 1 / 16, 1 / 32, 1 / 64)]
    assert max(consts) / min(consts) <= 4.0


def test_band_kernel_rejects_bad_eps():
    with pytest.raises(ValidationError):
        BandKernel(make_envelope("bump"), 0.0, 2)


def test_envelope_band_limit():
    assert make_envelope("bump").band_limit() == 2.0
    assert make_envelope("gaussian").band_limit() == pytest.approx(math.sqrt(math.log(1e16)), abs=0.01)
    flat = Envelope("flat", lambda x: np.ones_like(x))
    with pytest.raises(DivergentSeries):
        flat.band_limit()
    with pytest.raises(ValidationError):
        make_envelope("nope")


def test_polynomial_bernstein_slope():
    rows = poly_bernstein_ratios(2, 2.0, 1.0, [8, 16, 32, 64], 8, np.random.default_rng(0))
    fit = ratio_slope(rows)
    assert 0.8 <= fit.slope <= 1.2


def test_frame_error_bound():
    spec = FrameOperatorSpec(build_mask(), 3, 2)
    with pytest.raises(ValidationError):
        frame_error_bound(make_green(2, 1.0), spec, 0.0, 2.0)
    g = make_gaussian(2, 1.0)
    coarse = frame_error_bound(g, spec, 0.0, 2.0)
    fine = frame_error_bound(g, FrameOperatorSpec(build_mask(), 4, 2), 0.0, 2.0)
    assert 0.0 < fine < coarse


def test_band_kernel_helper_and_norms():
    kappa = make_envelope("bump")
    t = np.linspace(-1, 1, 5)
    assert np.allclose(band_kernel(kappa, 2, 0.25, t), BandKernel(kappa, 0.25, 2).evaluate(t))
    low = BandKernel(make_envelope("lowpass"), 0.5, 2)
    assert low.value_at_one() == pytest.approx(float(low.evaluate(1.0)))
    # ||K||_1 >= |integral of K| = |K^(0)|
    assert low.l1_norm() >= 0.999 * abs(float(low.coeffs[0]))


def test_nikolskii_ratio_bounded_on_circle():
    rows = poly_nikolskii_ratios(1, [4, 8], 4, np.random.default_rng(1))
    for row in rows:
        L = row["L"]
        assert 0 < row["max_ratio"] <= math.sqrt((2 * L + 1) / (2 * math.pi)) * (1 + 1e-9)
