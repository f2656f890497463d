"""Bank-side calibration: quality-parameter extraction and threshold setting.

The sweep measures the shot-averaged observable C-bar_N over an angle grid and
fits C-bar_N(Theta) = Q_o + (Q_a / 4) * (1 - cos Theta). The threshold tau is
the p_b quantile of C-bar_N(0) across a population of identical Haar-random
pairs: each calibration state contributes one shot-averaged observable, the
same measurement an authentication later performs, so the acceptance
probability of genuine tokens matches p_b by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import stats
from .statekit import BlochAngles, NoiseModel, haar_random
from .swaptest import DEFAULT_ROUNDS, shot_average_observable

DEFAULT_CALIBRATION_STATES = 400
DEFAULT_SHOTS_PER_POINT = 1000


class CalibrationError(Exception):
    """Calibration produced an unusable result (degenerate fit or threshold)."""


@dataclass(frozen=True)
class QualityParams:
    """Fitted oscillation amplitude Q_a (ideal 1) and offset Q_o (ideal 0)."""

    q_amplitude: float
    q_offset: float
    sigma_q_amplitude: float = 0.0
    sigma_q_offset: float = 0.0

    def __post_init__(self):
        if self.q_amplitude <= 0.0:
            raise CalibrationError(
                f"Q_a = {self.q_amplitude} <= 0: hardware unusable (no contrast)")
        # allow statistical undershoot of the ideal bounds, never gross violation
        slack_lo = max(3.0 * self.sigma_q_offset, 1e-9)
        slack_hi = max(3.0 * (self.sigma_q_offset + self.sigma_q_amplitude / 2.0), 1e-9)
        if self.q_offset < -slack_lo:
            raise CalibrationError(f"Q_o = {self.q_offset} is negative beyond noise")
        if self.q_offset + self.q_amplitude / 2.0 > 1.0 + slack_hi:
            raise CalibrationError("Q_o + Q_a/2 exceeds 1 beyond noise")

    def model(self, theta: float) -> float:
        """Expected C-bar_N at pair angle theta."""
        return self.q_offset + self.q_amplitude / 4.0 * (1.0 - math.cos(theta))


@dataclass(frozen=True)
class AcceptancePolicy:
    """Threshold tau on the measured observable, with its provenance."""

    tau: float
    p_b_target: float = 0.99
    tau_uncertainty: float = 0.0
    repetitions: int = DEFAULT_ROUNDS
    shots_per_authentication: int = DEFAULT_SHOTS_PER_POINT

    def __post_init__(self):
        # tau = 1.0 is allowed as a diagnostic accept-everything setting
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if not 0.0 < self.p_b_target < 1.0:
            raise ValueError(f"p_b_target must be in (0, 1), got {self.p_b_target}")


@dataclass(frozen=True)
class ThetaSweepPoint:
    theta: float
    c_bar: float
    standard_error: float

    def __post_init__(self):
        if not 0.0 <= self.c_bar <= 1.0:
            raise ValueError(f"c_bar must be in [0, 1], got {self.c_bar}")


QUALITY_BASIS = [
    ("q_offset", lambda theta: 1.0),
    ("q_amplitude", lambda theta: (1.0 - math.cos(theta)) / 4.0),
]


def theta_sweep(noise: NoiseModel, repetitions: int = DEFAULT_ROUNDS,
                shots: int = DEFAULT_SHOTS_PER_POINT, n_points: int = 20,
                rng: np.random.Generator | None = None) -> list[ThetaSweepPoint]:
    """Measure C-bar_N on a uniform Theta grid over [0, pi].

    Convention: the pair is a1 = (Theta, 0), a2 = (0, 0); the observable
    depends only on the angle between the states, so this loses no generality.
    """
    if n_points < 5:
        raise ValueError("need at least 5 sweep points")
    if rng is None:
        rng = np.random.default_rng()
    reference = BlochAngles(0.0, 0.0)
    points = []
    for theta in np.linspace(0.0, math.pi, n_points):
        c_bar, stderr = shot_average_observable(
            BlochAngles(float(theta), 0.0), reference, repetitions, noise, shots, rng)
        points.append(ThetaSweepPoint(float(theta), c_bar, stderr))
    return points


def fit_quality(points: list[ThetaSweepPoint]) -> QualityParams:
    """Least-squares (Q_o, Q_a) from sweep points; rejects degenerate fits."""
    if len(points) < 3:
        raise ValueError("need at least 3 sweep points")
    span = max(p.theta for p in points) - min(p.theta for p in points)
    if span < math.pi / 2.0:
        raise ValueError("sweep must span at least [0, pi/2]")
    fit = stats.fit_linear_basis(
        [p.theta for p in points], [p.c_bar for p in points], QUALITY_BASIS)
    return QualityParams(
        q_amplitude=fit.parameters["q_amplitude"],
        q_offset=fit.parameters["q_offset"],
        sigma_q_amplitude=fit.standard_deviations["q_amplitude"],
        sigma_q_offset=fit.standard_deviations["q_offset"],
    )


def identical_pair_samples(noise: NoiseModel, repetitions: int, shots_per_point: int,
                           n_states: int, rng: np.random.Generator) -> np.ndarray:
    """C-bar_N(0) for n_states identical Haar-random pairs, one value each."""
    values = np.empty(n_states)
    for i in range(n_states):
        angles = haar_random(rng)
        values[i], _ = shot_average_observable(
            angles, angles, repetitions, noise, shots_per_point, rng)
    return values


def threshold_from_samples(samples: np.ndarray, p_b_target: float, repetitions: int,
                           shots_per_point: int, rng: np.random.Generator,
                           bootstrap_resamples: int = 1000) -> AcceptancePolicy:
    """Quantile threshold plus bootstrap uncertainty from a calibration sample.

    An all-zero population (noise off) is flagged instead of silently
    returning tau = 0, which would reject genuine tokens under the strict
    C < tau rule.
    """
    if np.all(samples == 0.0):
        raise CalibrationError(
            "degenerate calibration: every observable is exactly 0 "
            "(noiseless hardware needs no threshold)")
    tau = stats.empirical_quantile(samples, p_b_target)
    if tau <= 0.0:
        raise CalibrationError(
            "degenerate calibration: the target quantile sits at 0 and the "
            "strict C < tau rule would reject genuine tokens")
    uncertainty = stats.bootstrap_std(
        samples, lambda s: stats.empirical_quantile(s, p_b_target),
        bootstrap_resamples, rng)
    return AcceptancePolicy(
        tau=tau,
        p_b_target=p_b_target,
        tau_uncertainty=uncertainty,
        repetitions=repetitions,
        shots_per_authentication=shots_per_point,
    )


def calibrate_threshold(noise: NoiseModel, repetitions: int = DEFAULT_ROUNDS,
                        shots_per_point: int = DEFAULT_SHOTS_PER_POINT,
                        n_states: int = DEFAULT_CALIBRATION_STATES,
                        p_b_target: float = 0.99,
                        rng: np.random.Generator | None = None,
                        bootstrap_resamples: int = 1000) -> AcceptancePolicy:
    """Set tau as the p_b quantile of the identical-pair C-bar_N(0) population.

    The returned policy records the calibration's shots per point so that
    authentications sample the same observable distribution.
    """
    if n_states < 50:
        raise ValueError("need at least 50 calibration states")
    if rng is None:
        rng = np.random.default_rng()
    samples = identical_pair_samples(noise, repetitions, shots_per_point, n_states, rng)
    return threshold_from_samples(samples, p_b_target, repetitions, shots_per_point,
                                  rng, bootstrap_resamples)
