"""Repeated SWAP-test engine.

One shot prepares token1 (qubit 0), token2 (qubit 1) and a |0> auxiliary
(qubit 2), then runs N rounds of H(aux) - CSWAP(aux; 0, 1) - H(aux) -
measure(aux) - reset(aux). The auxiliary reset is measure-then-conditional-X
on the true post-measurement branch; the token qubits carry the test
back-action from round to round.

Shots are independent: each one runs on a substream derived from
(master_seed, shot_index), so aggregates do not depend on evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statekit import (
    IDEAL,
    BlochAngles,
    NoiseModel,
    StateVector,
    _born_inplace,
    _cswap_inplace,
    _damp_inplace,
    _depolarize_inplace,
    _hadamard_inplace,
    _pauli_inplace,
    prepare,
    readout_flip,
    substream,
)

AUX = 2
DEFAULT_ROUNDS = 20


@dataclass(frozen=True)
class SwapTestRecord:
    """One shot's auxiliary bitstring c_1..c_N and its mean."""

    bits: tuple[int, ...]
    observable: float

    def __post_init__(self):
        if len(self.bits) < 1:
            raise ValueError("a record needs at least one bit")


@dataclass(frozen=True)
class DecayCurve:
    """Shot-averaged mean of bit c_n per repetition index n = 1..N."""

    n: tuple[int, ...]
    c_bar: tuple[float, ...]
    stderr: tuple[float, ...]
    shots: int


def initial_register(a1: BlochAngles, a2: BlochAngles) -> StateVector:
    """prepare(a1) (x) prepare(a2) (x) |0>_aux, little-endian."""
    amps = np.zeros(8, dtype=complex)
    amps[0:4] = np.kron(prepare(a2).amplitudes, prepare(a1).amplitudes)
    return StateVector(amps, 3)


def run_shot(a1: BlochAngles, a2: BlochAngles, repetitions: int = DEFAULT_ROUNDS,
             noise: NoiseModel = IDEAL,
             rng: np.random.Generator | None = None) -> SwapTestRecord:
    """Run one shot of the N-round SWAP test and record the reported bits.

    Operates on the register in place with the same gate kernels (and the same
    random-draw order) as the public statekit operations.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    amps = initial_register(a1, a2).amplitudes
    p1 = noise.p1
    p2 = noise.p2
    p_damp = noise.p_damp
    bits = []
    for _ in range(repetitions):
        _hadamard_inplace(amps, 3, AUX)
        if p1 > 0.0:
            _depolarize_inplace(amps, 3, AUX, p1, rng)
        _cswap_inplace(amps, 3, AUX, 0, 1)
        if p2 > 0.0:
            _depolarize_inplace(amps, 3, AUX, p2, rng)
            _depolarize_inplace(amps, 3, 0, p2, rng)
            _depolarize_inplace(amps, 3, 1, p2, rng)
        if p_damp > 0.0:
            _damp_inplace(amps, 3, AUX, p_damp, rng)
            _damp_inplace(amps, 3, 0, p_damp, rng)
            _damp_inplace(amps, 3, 1, p_damp, rng)
        _hadamard_inplace(amps, 3, AUX)
        if p1 > 0.0:
            _depolarize_inplace(amps, 3, AUX, p1, rng)
        outcome = _born_inplace(amps, 3, AUX, rng)
        bits.append(readout_flip(outcome, noise, rng))
        if outcome == 1:
            _pauli_inplace(amps, 3, AUX, 0)
    return SwapTestRecord(tuple(bits), sum(bits) / repetitions)


def _shot_observables(a1: BlochAngles, a2: BlochAngles, repetitions: int,
                      noise: NoiseModel, shots: int,
                      rng: np.random.Generator) -> np.ndarray:
    master = int(rng.integers(2**63))
    return np.array([
        run_shot(a1, a2, repetitions, noise, substream(master, i)).observable
        for i in range(shots)
    ])


def shot_average_observable(a1: BlochAngles, a2: BlochAngles,
                            repetitions: int = DEFAULT_ROUNDS,
                            noise: NoiseModel = IDEAL, shots: int = 1000,
                            rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Mean of the per-shot observable C_N and its standard error."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    values = _shot_observables(a1, a2, repetitions, noise, shots, rng)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(shots)) if shots > 1 else 0.0
    return mean, stderr


def decay_curve(a1: BlochAngles, a2: BlochAngles, max_repetitions: int,
                noise: NoiseModel = IDEAL, shots: int = 1000,
                rng: np.random.Generator | None = None) -> DecayCurve:
    """Per-round shot average of c_n over one common ensemble of shots."""
    if max_repetitions < 2:
        raise ValueError("max_repetitions must be >= 2")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    master = int(rng.integers(2**63))
    table = np.array([
        run_shot(a1, a2, max_repetitions, noise, substream(master, i)).bits
        for i in range(shots)
    ], dtype=float)
    c_bar = table.mean(axis=0)
    if shots > 1:
        stderr = table.std(axis=0, ddof=1) / np.sqrt(shots)
    else:
        stderr = np.zeros(max_repetitions)
    return DecayCurve(
        n=tuple(range(1, max_repetitions + 1)),
        c_bar=tuple(float(x) for x in c_bar),
        stderr=tuple(float(x) for x in stderr),
        shots=shots,
    )
