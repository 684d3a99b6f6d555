"""Tests for the rate, inverse and Besov experiments."""
import math

import pytest

from errors import DegreeOverflow, FitUnstable, InconclusiveTrend, InvalidFamily, ValidationError
from frames import build_mask
from harness import (RateExperiment, besov_seq_norm, besov_verdict, check_sequence_conditions,
                     classify_r, fit_inverse_rate, level_approximant, level_trend, make_target,
                     nested_sets, run_direct_rate, run_experiments, run_inverse_recovery,
                     synthetic_distances)
from kernel_catalog import make_gaussian, make_generating, make_green
from network import frame_degree_requirement


@pytest.fixture(scope="module")
def circle_sets():
    return nested_sets(1, 32, 3)


@pytest.fixture(scope="module")
def sphere_sets():
    return nested_sets(2, 40, 3)


def test_targets():
    cap = make_target("cap", 2, degree=16)
    assert cap.coeffs[0] == pytest.approx(2 * math.pi)
    arc = make_target("cap", 1, degree=8, theta0=0.25)
    assert arc.coeffs[0] == pytest.approx(0.5)
    green = make_target("green", 2, degree=4, s=2.0)
    assert green.coeffs[1] == pytest.approx(1.5 ** -2)
    with pytest.raises(ValidationError):
        make_target("nope", 2)


def test_direct_rate_matches_green_order(circle_sets):
    k = make_green(1, 3.0)
    target = make_target("green_bump", 1, s=3.0)
    report = run_direct_rate(RateExperiment(k, target, circle_sets, beta=3.0))
    assert report["regime"] == "rate"
    assert report["slope"] >= 2.7
    assert report["r_squared"] >= 0.95
    assert report["expected_slope"] == 3.0
    dists = [r["distance"] for r in report["levels"]]
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert report["exactness"] == "relaxed"


def test_direct_rate_on_the_two_sphere(sphere_sets):
    k = make_green(2, 3.0)
    target = make_target("green_bump", 2, s=3.0)
    report = run_direct_rate(RateExperiment(k, target, sphere_sets, beta=3.0))
    assert report["slope"] >= 2.7
    assert report["r_squared"] >= 0.95
    assert report["quoted"]


def test_frame_exactness_accounting(circle_sets):
    k = make_green(1, 3.0)
    target = make_target("green_bump", 1, s=3.0)
    coarse = RateExperiment(k, target, circle_sets[:1], exactness="frame")
    with pytest.raises(DegreeOverflow):
        level_approximant(coarse, circle_sets[0], build_mask())
    fine = RateExperiment(k, target, circle_sets[-1:], exactness="frame")
    rule, spec, net = level_approximant(fine, circle_sets[-1], build_mask())
    assert rule.degree_L >= frame_degree_requirement(1, spec.degree)
    assert net.centers.size == circle_sets[-1].size
    with pytest.raises(ValidationError):
        RateExperiment(k, target, circle_sets, exactness="loose")


def test_rate_experiment_checks_preconditions(circle_sets):
    k = make_green(1, 3.0)
    target = make_target("green", 1, degree=16)
    with pytest.raises(ValidationError):
        RateExperiment(k, target, circle_sets[::-1])
    with pytest.raises(ValidationError):
        RateExperiment(k, target, circle_sets, gamma=3.0, beta=3.0)
    # skipping two levels divides h by eight
    with pytest.raises(ValidationError):
        RateExperiment(k, target, circle_sets[::3])


def test_synthetic_rate_is_recovered():
    h, d = synthetic_distances(1.0, 2.0, 8)
    fit = fit_inverse_rate(h, d)
    assert fit.mu == pytest.approx(1.0, abs=0.1)
    assert fit.t == pytest.approx(2.0, abs=0.3)


def test_rate_fit_needs_three_levels():
    with pytest.raises(FitUnstable):
        fit_inverse_rate([0.5, 0.25], [0.1, 0.01])
    assert math.isinf(fit_inverse_rate([0.5, 0.25], [0.0, 0.0]).mu)


def test_inverse_recovery_verdicts(circle_sets):
    k = make_green(1, 3.0)
    target = make_target("green_bump", 1, s=3.0)
    report = run_inverse_recovery(k, target, circle_sets, nus=[1.0, 1.5, 2.5])
    status = {row["nu"]: row["status"] for row in report["nus"]}
    assert status == {1.0: "ok", 1.5: "ok", 2.5: "divergent"}
    assert len(report["distances"]) == len(circle_sets)


@pytest.mark.parametrize("mu,t,r,tau,expected", [
    (2.0, 0.0, 1.0, 2.0, "member"),
    (2.0, 0.0, 3.0, 2.0, "non-member"),
    (1.0, 0.0, 1.0, 2.0, "non-member"),
    (1.0, 1.0, 1.0, 2.0, "non-member"),
    (1.0, 1.0, 1.0, 3.0, "member"),
    (1.0, 0.4, 1.0, 3.0, "member"),
    (1.0, 0.3, 1.0, 3.0, "non-member"),
    (1.0, 0.0, 1.0, math.inf, "member"),
    (1.0, -0.5, 1.0, math.inf, "non-member"),
    (1.0, 2.0, 0.5, math.inf, "member"),
    (0.5, 0.0, 1.0, math.inf, "non-member"),
    (1.0, 1.0, 2.0, math.inf, "non-member"),
])
def test_besov_verdict(mu, t, r, tau, expected):
    assert besov_verdict(mu, t, r, tau) == expected


def test_besov_sequence_norm():
    d = [1.0, 0.5, 0.25]
    assert besov_seq_norm(d, math.inf, 1.0) == pytest.approx(1.0)
    assert besov_seq_norm(d, 1.0, 1.0) == pytest.approx(3.0)
    with pytest.raises(ValidationError):
        besov_seq_norm(d, 2.0, 0.0)


def test_classify_from_synthetic_fit():
    fit = fit_inverse_rate(*synthetic_distances(3.0, 0.0, 8))
    assert classify_r(fit.mu, fit.t, 1.0, 2.0) == "member"
    assert classify_r(fit.mu, fit.t, 3.5, 2.0) == "non-member"
    with pytest.raises(InconclusiveTrend):
        classify_r(fit.mu, fit.t, 3.05, 2.0)


def test_level_trend():
    assert level_trend([1.0, 0.5, 0.25]) == pytest.approx(-1.0)
    assert level_trend([0.0, 0.0]) == -math.inf


def test_sequence_conditions():
    report = check_sequence_conditions(make_gaussian(2, 1.0), 1.0, Ls=(4, 8, 16), max_m=3)
    assert 0 <= report["certified_m"] <= 3
    profile = report["log_bernstein_profile"]
    assert all(b <= a + 1e-9 for a, b in zip(profile, profile[1:]))


def test_gaussian_certified_on_default_grid():
    report = check_sequence_conditions(make_gaussian(2, 1.0), 3.0)
    assert report["L"] == [8, 16, 32, 64, 128, 256]
    assert 0 <= report["certified_m"] <= 8
    assert all(math.isfinite(v) for v in report["log_direct_profile"])


def test_generating_kernel_certified():
    report = check_sequence_conditions(make_generating(2, 0.5), 3.0)
    assert report["certified_m"] <= 4
    with pytest.raises(InvalidFamily):
        check_sequence_conditions(make_green(2, 3.0), 1.0)


def test_run_experiments_keeps_order():
    tasks = [lambda i=i: {"index": i} for i in range(6)]
    assert [r["index"] for r in run_experiments(tasks, workers=3)] == list(range(6))
