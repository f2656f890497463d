"""Token lifecycle: issuance of identical pairs, authentication against the
vault copy, and bill-level accept/reject statistics.

The preparation angles live only inside TokenPair; authentication results
carry serials, observables and booleans, never angles. Authentication
consumes the pair: the angles are the bank's only record of the state, and
the comparison measurement destroys it.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from . import stats
from .calibration import AcceptancePolicy
from .statekit import BlochAngles, NoiseModel, haar_random
from .swaptest import shot_average_observable


class TokenConsumedError(Exception):
    """The pair was already authenticated once and no longer exists."""

    def __init__(self, serial: str):
        super().__init__(f"token pair {serial} is consumed")
        self.serial = serial


class UnknownSerialError(KeyError):
    pass


@dataclass
class TokenPair:
    """A user token and its vault twin. Held by the issuing side only."""

    serial: str
    user_angles: BlochAngles
    vault_angles: BlochAngles
    consumed: bool = field(default=False)


@dataclass(frozen=True)
class BillPolicy:
    """A bill of M tokens is accepted when at least m individual tokens pass."""

    total: int
    minimum_accepted: int
    target_type2: float = 1e-4

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("a bill needs at least one token")
        if not 0 <= self.minimum_accepted <= self.total:
            raise ValueError("need 0 <= m <= M")
        if not 0.0 < self.target_type2 < 1.0:
            raise ValueError("target_type2 must be in (0, 1)")


@dataclass(frozen=True)
class AuthenticationResult:
    serial: str
    observable: float
    accepted: bool


def issue_pair(rng: np.random.Generator) -> TokenPair:
    """Draw one Haar-random state into both slots under a fresh 128-bit serial."""
    serial = rng.bytes(16).hex()
    angles = haar_random(rng)
    return TokenPair(serial=serial, user_angles=angles, vault_angles=angles)


def _measure_and_decide(pair: TokenPair, policy: AcceptancePolicy,
                        noise: NoiseModel, rng: np.random.Generator) -> AuthenticationResult:
    observable, _ = shot_average_observable(
        pair.user_angles, pair.vault_angles, policy.repetitions, noise,
        policy.shots_per_authentication, rng)
    return AuthenticationResult(
        serial=pair.serial,
        observable=observable,
        accepted=observable < policy.tau,
    )


def authenticate_token(pair: TokenPair, policy: AcceptancePolicy,
                       noise: NoiseModel, rng: np.random.Generator) -> AuthenticationResult:
    """Compare the user token with the vault copy and apply the tau rule.

    Measures the same shot-averaged observable the policy was calibrated on
    and accepts iff it falls strictly below tau. The pair is consumed either
    way; a second attempt raises TokenConsumedError.
    """
    if pair.consumed:
        raise TokenConsumedError(pair.serial)
    pair.consumed = True
    return _measure_and_decide(pair, policy, noise, rng)


def bill_accept_probability(minimum_accepted: int, total: int, p_token: float) -> float:
    """Probability that at least m of M independent tokens pass."""
    return stats.binomial_tail_at_least(minimum_accepted, total, p_token)


def choose_bill_threshold(total: int, p_token: float, target_type2: float) -> int:
    """Largest m whose bill-acceptance probability still meets 1 - target_type2."""
    if not 0.0 < target_type2 < 1.0:
        raise ValueError("target_type2 must be in (0, 1)")
    best = None
    for m in range(total + 1):
        if bill_accept_probability(m, total, p_token) >= 1.0 - target_type2:
            best = m
    if best is None:
        raise ValueError(
            f"no threshold meets type-II target {target_type2} (unreachable even at m=0)")
    return best


def authenticate_bill(pairs: list[TokenPair], policy: AcceptancePolicy, bill: BillPolicy,
                      noise: NoiseModel, rng: np.random.Generator) -> tuple[int, bool]:
    """Authenticate every token of a bill and apply the m-of-M rule.

    A bill mixing consumed and fresh pairs is rejected up front and no token
    is touched.
    """
    if len(pairs) != bill.total:
        raise ValueError(f"bill expects {bill.total} tokens, got {len(pairs)}")
    consumed = [p.serial for p in pairs if p.consumed]
    if consumed:
        raise TokenConsumedError(consumed[0])
    accepted = sum(
        authenticate_token(pair, policy, noise, rng).accepted for pair in pairs)
    return accepted, accepted >= bill.minimum_accepted


class Vault:
    """In-memory registry of issued pairs, keyed by serial.

    This is the bank's state for the service layer. Consumption is the single
    serialization point: the check-and-consume step holds a lock so a pair can
    never authenticate twice under concurrent requests.
    """

    def __init__(self):
        self._pairs: dict[str, TokenPair] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._pairs)

    def issue(self, rng: np.random.Generator) -> str:
        pair = issue_pair(rng)
        with self._lock:
            self._pairs[pair.serial] = pair
        return pair.serial

    def _claim(self, serial: str) -> TokenPair:
        with self._lock:
            pair = self._pairs.get(serial)
            if pair is None:
                raise UnknownSerialError(serial)
            if pair.consumed:
                raise TokenConsumedError(serial)
            pair.consumed = True
        return pair

    def authenticate(self, serial: str, policy: AcceptancePolicy,
                     noise: NoiseModel, rng: np.random.Generator) -> AuthenticationResult:
        pair = self._claim(serial)
        return _measure_and_decide(pair, policy, noise, rng)

    def authenticate_bill(self, serials: list[str], policy: AcceptancePolicy,
                          bill: BillPolicy, noise: NoiseModel,
                          rng: np.random.Generator) -> tuple[int, bool]:
        if len(serials) != bill.total:
            raise ValueError(f"bill expects {bill.total} tokens, got {len(serials)}")
        with self._lock:
            missing = [s for s in serials if s not in self._pairs]
            if missing:
                raise UnknownSerialError(missing[0])
            pairs = [self._pairs[s] for s in serials]
            consumed = [p.serial for p in pairs if p.consumed]
            if consumed:
                raise TokenConsumedError(consumed[0])
            for pair in pairs:
                pair.consumed = True
        accepted = sum(
            _measure_and_decide(pair, policy, noise, rng).accepted for pair in pairs)
        return accepted, accepted >= bill.minimum_accepted
