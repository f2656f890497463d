"""Query attack: inversion round trip, case analysis, and the campaign against
an exact two-stage enumeration oracle."""
import math
from fractions import Fraction

import numpy as np
import pytest

from qvault.attack import (
    AttackConfig,
    attack_campaign,
    estimate_theta,
    forged_bill_probability,
    run_single_attack,
)
from qvault.calibration import AcceptancePolicy, QualityParams
from qvault.statekit import BlochAngles, NoiseModel, substream

IDEAL_QUALITY = QualityParams(q_amplitude=1.0, q_offset=0.0)
KINGSTON_LIKE_QUALITY = QualityParams(q_amplitude=0.56, q_offset=0.10,
                                      sigma_q_amplitude=0.03, sigma_q_offset=0.01)


def make_policy(tau=0.25, shots=1):
    return AcceptancePolicy(tau=tau, repetitions=20, shots_per_authentication=shots)


# ---------------------------------------------------------------- inversion

def test_estimate_theta_endpoints():
    assert estimate_theta(0.10, KINGSTON_LIKE_QUALITY) == (0.0, True)
    top = KINGSTON_LIKE_QUALITY.q_offset + KINGSTON_LIKE_QUALITY.q_amplitude / 2
    theta, in_domain = estimate_theta(top, KINGSTON_LIKE_QUALITY)
    assert in_domain and theta == pytest.approx(math.pi)


def test_estimate_theta_kingston_arithmetic():
    theta, in_domain = estimate_theta(0.24, KINGSTON_LIKE_QUALITY)
    assert in_domain
    assert theta == pytest.approx(math.pi / 2, abs=1e-12)


def test_estimate_theta_out_of_domain_clamps():
    low = estimate_theta(-0.01, IDEAL_QUALITY)
    assert low == (0.0, False)
    high = estimate_theta(0.9, IDEAL_QUALITY)
    assert high.theta == pytest.approx(math.pi)
    assert not high.in_domain


@pytest.mark.parametrize("quality", [
    IDEAL_QUALITY,
    KINGSTON_LIKE_QUALITY,
    QualityParams(q_amplitude=0.42, q_offset=0.135),
])
def test_inversion_round_trip_100_points(quality):
    for theta in np.linspace(0.0, math.pi, 102)[1:-1]:
        estimate = estimate_theta(quality.model(theta), quality)
        assert estimate.in_domain
        assert abs(estimate.theta - theta) < 1e-10
    # at the exact endpoints arccos conditioning limits the recoverable
    # precision to ~sqrt(eps); the model value itself round-trips exactly
    for theta in (0.0, math.pi):
        estimate = estimate_theta(quality.model(theta), quality)
        assert abs(estimate.theta - theta) < 1e-7
        assert quality.model(estimate.theta) == pytest.approx(quality.model(theta), abs=1e-15)


# ---------------------------------------------------------------- single attack

def test_perfect_clone_of_known_state(rng):
    cfg = AttackConfig(known_quality=IDEAL_QUALITY)
    outcome = run_single_attack(BlochAngles(0.0, 0.0), cfg, make_policy(), NoiseModel(), rng)
    assert outcome.measured_observable == 0.0
    assert outcome.estimated_theta == 0.0
    assert outcome.verifier_observable == 0.0
    assert outcome.accepted


def test_antipodal_target_case_analysis():
    # noiseless single-shot probe on an orthogonal target: the observable is
    # 0 or 1; 1 forges the right polar angle, 0 forges the antipode and the
    # verifier then accepts half the time
    cfg = AttackConfig(known_quality=IDEAL_QUALITY)
    target = BlochAngles(math.pi, 0.0)
    accepted = probe_one = 0
    trials = 3000
    for i in range(trials):
        outcome = run_single_attack(target, cfg, make_policy(tau=0.25),
                                    NoiseModel(), substream(55, i))
        assert outcome.measured_observable in (0.0, 1.0)
        if outcome.measured_observable == 1.0:
            probe_one += 1
            assert outcome.estimated_theta == pytest.approx(math.pi)
            assert not outcome.estimate_in_domain  # argument hits -3, clamped
            assert outcome.accepted  # forged state equals the target
        else:
            assert outcome.estimated_theta == 0.0
        accepted += outcome.accepted
    sigma = math.sqrt(0.25 / trials)
    assert probe_one / trials == pytest.approx(0.5, abs=4 * sigma)
    # total: P(accept) = 1/2 + 1/2 * 1/2 = 3/4
    assert accepted / trials == pytest.approx(0.75, abs=4 * sigma)


def test_wrong_phi_costs_fidelity(rng):
    # equator target with phi = pi/2: any fixed-phi=0 forgery lies in the
    # x-z plane, orthogonal to the target's Bloch vector, so the verifier
    # fidelity is 1/2 whatever polar angle the probe estimated and the
    # single-shot rejection rate is exactly 1/4
    cfg = AttackConfig(known_quality=IDEAL_QUALITY)
    target = BlochAngles(math.pi / 2, math.pi / 2)
    rejected = 0
    trials = 3000
    for i in range(trials):
        outcome = run_single_attack(target, cfg, make_policy(tau=0.25),
                                    NoiseModel(), substream(66, i))
        assert outcome.forged.phi == 0.0
        rejected += not outcome.accepted
    sigma = math.sqrt(0.25 * 0.75 / trials)
    assert rejected / trials == pytest.approx(0.25, abs=4 * sigma)


def test_uniform_phi_policy(rng):
    cfg = AttackConfig(known_quality=IDEAL_QUALITY, phi_policy="uniform")
    phis = set()
    for i in range(10):
        outcome = run_single_attack(BlochAngles(1.0, 0.0), cfg, make_policy(),
                                    NoiseModel(), substream(77, i))
        phis.add(outcome.forged.phi)
    assert len(phis) == 10


def test_attack_requires_quality(rng):
    with pytest.raises(ValueError):
        run_single_attack(BlochAngles(0, 0), AttackConfig(), make_policy(), NoiseModel(), rng)


# ---------------------------------------------------------------- campaign vs oracle

def oracle_campaign_p_f(probe_shots: int, verify_shots: int, tau: float,
                        theta_grid: int = 801, phi_grid: int = 96) -> float:
    """Success rate of the noiseless fixed-phi attack by enumerating the
    two-stage binomial outcome tree on a (cos theta, phi)-uniform grid.

    The probe statistics depend only on the polar angle, but the verifier
    fidelity between the phi=0 forgery and the target involves the target's
    azimuthal angle, so both Haar coordinates are averaged.
    """
    def tail_below(shots, w, cut):
        # P(Bin(shots, w)/shots < cut); strict inequality on the mean
        limit = min(math.ceil(cut * shots), shots + 1)
        return sum(
            math.comb(shots, k) * w**k * (1 - w) ** (shots - k)
            for k in range(limit))

    phis = (np.arange(phi_grid) + 0.5) / phi_grid * 2 * math.pi
    total = 0.0
    for c in np.linspace(-1.0, 1.0, theta_grid):
        theta = math.acos(c)
        w_probe = (1 - math.cos(theta / 2) ** 2) / 2  # 1st-round rate vs |0>
        p_accept = 0.0
        for k in range(probe_shots + 1):
            p_k = math.comb(probe_shots, k) * w_probe**k * (1 - w_probe) ** (probe_shots - k)
            if p_k == 0.0:
                continue
            argument = 1.0 - 4.0 * k / probe_shots
            est = math.acos(max(-1.0, min(1.0, argument)))
            accept_given_k = 0.0
            for phi in phis:
                cos_between = (math.cos(theta) * math.cos(est)
                               + math.sin(theta) * math.sin(est) * math.cos(phi))
                w_verify = (1 - (1 + cos_between) / 2) / 2
                accept_given_k += tail_below(verify_shots, w_verify, tau)
            p_accept += p_k * accept_given_k / phi_grid
        total += p_accept
    return total / theta_grid


def test_campaign_matches_enumeration_oracle():
    tau = 0.25
    probe_shots = 5
    policy = AcceptancePolicy(tau=tau, repetitions=20, shots_per_authentication=5)
    cfg = AttackConfig(known_quality=IDEAL_QUALITY)
    campaign = attack_campaign(4000, probe_shots, cfg, policy, NoiseModel(),
                               np.random.default_rng(13))
    expected = oracle_campaign_p_f(probe_shots, 5, tau)
    sigma = math.sqrt(expected * (1 - expected) / 4000)
    assert campaign.p_f == pytest.approx(expected, abs=4 * sigma)
    assert campaign.accepted_count == round(campaign.p_f * campaign.n_attacks)
    assert len(campaign.verifier_observables) == 4000


def test_single_shot_campaign_matches_closed_form():
    # single-shot probe and verify: acceptance has the closed form
    # E[((1+F)/2)^2 + ((1-F)/2)((2-F)/2)] = 19/24 under Haar targets
    policy = make_policy(tau=0.25, shots=1)
    cfg = AttackConfig(known_quality=IDEAL_QUALITY)
    campaign = attack_campaign(6000, 1, cfg, policy, NoiseModel(),
                               np.random.default_rng(29))
    expected = 19 / 24
    sigma = math.sqrt(expected * (1 - expected) / 6000)
    assert campaign.p_f == pytest.approx(expected, abs=4 * sigma)


def test_everything_accepted_when_tau_approaches_one():
    # acceptance is strict C < tau, so tau near 1 accepts every averaged
    # observable that is not exactly 1.0 (measure-zero at 40 verify shots)
    policy = AcceptancePolicy(tau=0.999999, repetitions=5, shots_per_authentication=40)
    cfg = AttackConfig(known_quality=IDEAL_QUALITY, repetitions=5)
    campaign = attack_campaign(100, 1, cfg, policy, NoiseModel(p_readout=0.3),
                               np.random.default_rng(31))
    assert campaign.p_f == 1.0


def test_campaign_validates_inputs(rng):
    cfg = AttackConfig(known_quality=IDEAL_QUALITY)
    with pytest.raises(ValueError):
        attack_campaign(10, 1, cfg, make_policy(), NoiseModel(), rng)


# ---------------------------------------------------------------- bill security

def test_forged_bill_probability_delegates():
    value = forged_bill_probability(20, 17, 0.586)
    expected = float(sum(
        math.comb(20, k) * Fraction(586, 1000)**k * Fraction(414, 1000) ** (20 - k)
        for k in range(17, 21)))
    assert value == pytest.approx(expected, rel=1e-10)
    assert forged_bill_probability(50, 0, 0.1) == 1.0


def test_forged_bill_monotone_in_total():
    from qvault.protocol import choose_bill_threshold

    for p_f in (0.586, 0.635, 0.713):
        values = []
        for total in (10, 20, 50, 100, 200):
            minimum = choose_bill_threshold(total, 0.99, 1e-4)
            values.append(forged_bill_probability(total, minimum, p_f))
        assert all(a >= b for a, b in zip(values, values[1:]))


def test_all_forged_bills_match_binomial_tail():
    # bills built entirely from forged tokens: the empirical acceptance rate
    # must match the binomial tail at the empirical per-token forgery rate
    from qvault.protocol import BillPolicy, TokenPair, authenticate_bill
    from qvault.statekit import haar_random
    from qvault.swaptest import shot_average_observable

    rng = np.random.default_rng(404)
    noise = NoiseModel(p1=0.003, p2=0.015, p_readout=0.01, p_damp=0.015)
    policy = AcceptancePolicy(tau=0.24, repetitions=10, shots_per_authentication=25)
    cfg = AttackConfig(known_quality=KINGSTON_LIKE_QUALITY, repetitions=10)
    total, minimum = 5, 4
    bill = BillPolicy(total=total, minimum_accepted=minimum)
    bills = 250
    accepted_bills = 0
    accepted_tokens = 0
    for _ in range(bills):
        pairs = []
        for _ in range(total):
            target = haar_random(rng)
            probe, _ = shot_average_observable(
                target, cfg.probe_angles, cfg.repetitions, noise, 25, rng)
            forged = BlochAngles(estimate_theta(probe, cfg.known_quality).theta, 0.0)
            pairs.append(TokenPair(serial=rng.bytes(16).hex(),
                                   user_angles=forged, vault_angles=target))
        count, decision = authenticate_bill(pairs, policy, bill, noise, rng)
        accepted_bills += decision
        accepted_tokens += count
    p_f_hat = accepted_tokens / (bills * total)
    predicted = forged_bill_probability(total, minimum, p_f_hat)
    sigma = math.sqrt(max(predicted * (1 - predicted), 1e-6) / bills)
    assert accepted_bills / bills == pytest.approx(predicted, abs=4 * sigma)
