"""Query attack: probe a token with the SWAP test, invert the calibrated
response curve to estimate the polar angle, forge a replacement, and measure
how often the verifier accepts it.

The attacker knows the public quality parameters (Q_o, Q_a) and probes with a
fixed reference state, so the inversion
    Theta = arccos(1 + 4 (Q_o - C) / Q_a)
recovers only the polar angle; the azimuthal angle of the forgery comes from
a configurable policy (fixed value, or uniform random).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .calibration import AcceptancePolicy, QualityParams
from .protocol import bill_accept_probability
from .statekit import BlochAngles, NoiseModel, haar_random, substream
from .swaptest import DEFAULT_ROUNDS, shot_average_observable


class ThetaEstimate(NamedTuple):
    theta: float
    in_domain: bool


@dataclass(frozen=True)
class AttackConfig:
    """How the attacker probes and forges.

    An out-of-domain inversion argument is clamped to the nearest endpoint
    rather than discarded: a rational attacker keeps the maximal-information
    estimate, and dropping those queries would understate the attack.
    """

    probe_angles: BlochAngles = field(default_factory=lambda: BlochAngles(0.0, 0.0))
    phi_policy: Literal["fixed", "uniform"] = "fixed"
    phi_value: float = 0.0
    repetitions: int = DEFAULT_ROUNDS
    known_quality: QualityParams | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class AttackOutcome:
    measured_observable: float
    estimated_theta: float
    estimate_in_domain: bool
    forged: BlochAngles
    verifier_observable: float
    accepted: bool


@dataclass(frozen=True)
class CampaignResult:
    p_f: float
    verifier_observables: tuple[float, ...]
    accepted_count: int
    n_attacks: int


def estimate_theta(observable: float, quality: QualityParams) -> ThetaEstimate:
    """Invert the calibrated response curve at a measured observable.

    Returns the clamped endpoint (0 or pi) with in_domain=False when the
    arccos argument falls outside [-1, 1].
    """
    argument = 1.0 + 4.0 * (quality.q_offset - observable) / quality.q_amplitude
    if -1.0 <= argument <= 1.0:
        return ThetaEstimate(math.acos(argument), True)
    return ThetaEstimate(0.0 if argument > 1.0 else math.pi, False)


def _forged_phi(cfg: AttackConfig, rng: np.random.Generator) -> float:
    if cfg.phi_policy == "uniform":
        return float(rng.uniform(0.0, 2.0 * math.pi))
    return cfg.phi_value


def run_single_attack(target: BlochAngles, cfg: AttackConfig, policy: AcceptancePolicy,
                      noise: NoiseModel, rng: np.random.Generator,
                      probe_shots: int = 1) -> AttackOutcome:
    """One probe-forge-verify cycle against a token in state `target`.

    The probe measurement averages `probe_shots` SWAP-test shots; the verifier
    then measures the forged token against a fresh vault copy exactly as a
    genuine authentication would (policy repetitions and shots).
    """
    if cfg.known_quality is None:
        raise ValueError("the attack needs the published quality parameters")
    measured, _ = shot_average_observable(
        target, cfg.probe_angles, cfg.repetitions, noise, probe_shots, rng)
    estimate = estimate_theta(measured, cfg.known_quality)
    forged = BlochAngles(estimate.theta, _forged_phi(cfg, rng))
    verifier_observable, _ = shot_average_observable(
        forged, target, policy.repetitions, noise,
        policy.shots_per_authentication, rng)
    return AttackOutcome(
        measured_observable=measured,
        estimated_theta=estimate.theta,
        estimate_in_domain=estimate.in_domain,
        forged=forged,
        verifier_observable=verifier_observable,
        accepted=verifier_observable < policy.tau,
    )


def attack_campaign(n_targets: int, shots: int, cfg: AttackConfig,
                    policy: AcceptancePolicy, noise: NoiseModel,
                    rng: np.random.Generator | None = None) -> CampaignResult:
    """Forgery success rate over Haar-random targets.

    Each target is probed with `shots` SWAP-test shots and verified once; the
    full verifier-observable sample is retained for distribution comparisons.
    """
    if n_targets < 50:
        raise ValueError("need at least 50 targets for a campaign")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    master = int(rng.integers(2**63))
    observables = []
    accepted = 0
    for i in range(n_targets):
        stream = substream(master, i)
        target = haar_random(stream)
        outcome = run_single_attack(target, cfg, policy, noise, stream, probe_shots=shots)
        observables.append(outcome.verifier_observable)
        accepted += outcome.accepted
    return CampaignResult(
        p_f=accepted / n_targets,
        verifier_observables=tuple(observables),
        accepted_count=accepted,
        n_attacks=n_targets,
    )


def forged_bill_probability(total: int, minimum_accepted: int, p_f: float) -> float:
    """Probability that a fully forged M-token bill clears the m-of-M rule."""
    return bill_accept_probability(minimum_accepted, total, p_f)
