"""Calibration: sweep shape, quality fit, and threshold coverage."""
import math

import numpy as np
import pytest

from qvault.calibration import (
    AcceptancePolicy,
    CalibrationError,
    QualityParams,
    ThetaSweepPoint,
    calibrate_threshold,
    fit_quality,
    identical_pair_samples,
    theta_sweep,
    threshold_from_samples,
)
from qvault.statekit import NoiseModel

NOISE = NoiseModel(p1=0.003, p2=0.015, p_readout=0.01, p_damp=0.015)


def synthetic_points(q_offset, q_amplitude, sigma=0.0, rng=None, n=20):
    thetas = np.linspace(0, math.pi, n)
    points = []
    for theta in thetas:
        value = q_offset + q_amplitude * (1 - math.cos(theta)) / 4
        if sigma:
            value += rng.normal(0, sigma)
        points.append(ThetaSweepPoint(float(theta), float(np.clip(value, 0, 1)), sigma))
    return points


# ---------------------------------------------------------------- types

def test_quality_params_validation():
    with pytest.raises(CalibrationError):
        QualityParams(q_amplitude=-0.2, q_offset=0.1)
    with pytest.raises(CalibrationError):
        QualityParams(q_amplitude=0.5, q_offset=-0.05, sigma_q_offset=0.001)
    with pytest.raises(CalibrationError):
        QualityParams(q_amplitude=1.9, q_offset=0.2)
    # tiny statistical undershoot of 0 is tolerated
    q = QualityParams(q_amplitude=1.0, q_offset=-0.001, sigma_q_offset=0.002)
    assert q.q_offset == -0.001


def test_quality_model_is_monotone():
    q = QualityParams(q_amplitude=0.56, q_offset=0.10)
    thetas = np.linspace(0, math.pi, 50)
    values = [q.model(t) for t in thetas]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_policy_validation():
    with pytest.raises(ValueError):
        AcceptancePolicy(tau=0.0)
    with pytest.raises(ValueError):
        AcceptancePolicy(tau=0.2, p_b_target=1.0)


# ---------------------------------------------------------------- sweep

def test_sweep_noiseless_endpoints(rng):
    points = theta_sweep(NoiseModel(), 20, 1500, 8, rng)
    assert points[0].theta == 0.0
    assert points[0].c_bar == 0.0
    assert points[-1].theta == pytest.approx(math.pi)
    sigma = math.sqrt(0.25 / 1500)
    assert points[-1].c_bar == pytest.approx(0.5, abs=4 * sigma)


def test_sweep_requires_five_points(rng):
    with pytest.raises(ValueError):
        theta_sweep(NoiseModel(), 20, 10, 4, rng)


def test_noiseless_sweep_fit_is_ideal(rng):
    points = theta_sweep(NoiseModel(), 20, 1000, 20, rng)
    quality = fit_quality(points)
    assert abs(quality.q_offset) <= 3 * quality.sigma_q_offset
    assert abs(quality.q_amplitude - 1.0) <= 3 * quality.sigma_q_amplitude


# ---------------------------------------------------------------- quality fit

def test_fit_quality_exact_synthetic():
    quality = fit_quality(synthetic_points(0.0, 1.0))
    assert quality.q_offset == pytest.approx(0.0, abs=1e-10)
    assert quality.q_amplitude == pytest.approx(1.0, abs=1e-10)


def test_fit_quality_hardware_like_recovery(rng):
    quality = fit_quality(synthetic_points(0.10, 0.56, sigma=0.01, rng=rng))
    assert abs(quality.q_offset - 0.10) <= 3 * quality.sigma_q_offset
    assert abs(quality.q_amplitude - 0.56) <= 3 * quality.sigma_q_amplitude


def test_fit_quality_two_point_identities():
    c0, cpi = 0.12, 0.35
    points = [ThetaSweepPoint(0.0, c0, 0.0), ThetaSweepPoint(math.pi / 2, (c0 + cpi) / 2, 0.0),
              ThetaSweepPoint(math.pi, cpi, 0.0)]
    quality = fit_quality(points)
    assert quality.q_offset == pytest.approx(c0, abs=1e-10)
    assert quality.q_amplitude == pytest.approx(2 * (cpi - c0), abs=1e-10)


def test_fit_quality_rejects_degenerate():
    with pytest.raises(CalibrationError):
        fit_quality(synthetic_points(0.3, -0.4))
    with pytest.raises(ValueError):
        fit_quality(synthetic_points(0.1, 0.5)[:2])


def test_fit_quality_requires_span():
    narrow = [ThetaSweepPoint(t, 0.1, 0.0) for t in (0.0, 0.3, 1.0)]
    with pytest.raises(ValueError):
        fit_quality(narrow)


def test_sweep_fit_consistency(rng):
    # model evaluated back on the grid reproduces the measured points
    points = theta_sweep(NOISE, 20, 800, 12, rng)
    quality = fit_quality(points)
    ok = sum(
        abs(quality.model(p.theta) - p.c_bar) <= 4 * max(p.standard_error, 1e-4)
        for p in points
    )
    assert ok >= 0.9 * len(points)


# ---------------------------------------------------------------- threshold

def test_threshold_coverage(rng):
    policy_rng = np.random.default_rng(400)
    samples = identical_pair_samples(NOISE, 20, 150, 120, policy_rng)
    policy = threshold_from_samples(samples, 0.99, 20, 150, policy_rng, 200)
    coverage = float(np.mean(samples < policy.tau))
    assert abs(coverage - 0.99) <= 3 * math.sqrt(0.99 * 0.01 / samples.size) + 1 / samples.size
    assert policy.tau_uncertainty > 0
    assert policy.shots_per_authentication == 150


def test_threshold_median_is_median():
    rng = np.random.default_rng(1)
    samples = rng.normal(0.3, 0.05, 501).clip(0.01, 0.99)
    policy = threshold_from_samples(samples, 0.5, 20, 10, rng, 150)
    assert policy.tau == pytest.approx(float(np.median(samples)), abs=1e-12)


def test_degenerate_noiseless_calibration_flagged(rng):
    with pytest.raises(CalibrationError):
        calibrate_threshold(NoiseModel(), 20, 10, 50, 0.99, rng, bootstrap_resamples=150)


def test_quantile_pinned_at_zero_flagged(rng):
    # not all-zero, but the target quantile still sits at 0: the strict
    # C < tau rule would reject every genuine token
    samples = np.zeros(500)
    samples[-1] = 0.3
    with pytest.raises(CalibrationError):
        threshold_from_samples(samples, 0.5, 20, 10, rng, 150)


def test_calibrate_threshold_end_to_end(rng):
    policy = calibrate_threshold(NOISE, 10, 60, 60, 0.95, rng, bootstrap_resamples=150)
    assert 0 < policy.tau < 1
    assert policy.repetitions == 10
    assert policy.p_b_target == 0.95


def test_calibrate_threshold_needs_states(rng):
    with pytest.raises(ValueError):
        calibrate_threshold(NOISE, 20, 10, 20, 0.99, rng)
