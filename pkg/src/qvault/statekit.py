"""Exact statevector simulation of the 1-3 qubit token register.

Noise is a stochastic Pauli trajectory (pure states only): after each noisy
gate, every participating qubit independently suffers a uniform X/Y/Z error
with the configured probability. Readout error flips the reported classical
bit without disturbing the register. With the all-zero noise model every
operation is the textbook unitary / projective definition.

Amplitude ordering is little-endian: qubit 0 is the least-significant bit of
the amplitude index. This is a wire-format commitment relied on by tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
_SQRT1_2 = 1.0 / math.sqrt(2.0)

NORM_ATOL = 1e-10


class SimulationError(Exception):
    """Numeric fault inside the simulator (e.g. renormalizing a dead branch)."""


@dataclass(frozen=True)
class BlochAngles:
    """Preparation angles (theta, phi) of a single-qubit token state.

    Normalized on construction to theta in [0, pi], phi in [0, 2*pi), keeping
    the Bloch vector fixed (theta > pi folds back and shifts phi by pi).
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta) % TWO_PI
        phi = float(self.phi)
        if theta > math.pi:
            theta = TWO_PI - theta
            phi += math.pi
        phi %= TWO_PI
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def bloch_vector(self) -> tuple[float, float, float]:
        st = math.sin(self.theta)
        return (st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta))


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic error rates of the simulated hardware.

    p1: depolarizing probability per single-qubit gate.
    p2: depolarizing probability per qubit touched by a multi-qubit gate.
    p_damp: amplitude-damping probability per qubit touched by a multi-qubit
        gate (quantum-jump unraveling toward |0>). Depolarizing alone cannot
        reproduce hardware whose identical-pair observable stays low while the
        contrast collapses; the damping term supplies that axis.
    p_readout: classical bit-flip probability of a reported measurement.
    """

    p1: float = 0.0
    p2: float = 0.0
    p_readout: float = 0.0
    p_damp: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_readout", "p_damp"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")

    @property
    def is_ideal(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.p_readout == 0.0 and self.p_damp == 0.0


IDEAL = NoiseModel()


@dataclass
class StateVector:
    """Complex amplitudes of a 1-3 qubit register (little-endian)."""

    amplitudes: np.ndarray
    qubit_count: int = field(default=0)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = int(round(math.log2(amps.size)))
        if amps.size != 2**n or not 1 <= n <= 3:
            raise ValueError(f"amplitude count {amps.size} is not 2^n for n in 1..3")
        if self.qubit_count and self.qubit_count != n:
            raise ValueError(f"qubit_count {self.qubit_count} does not match {amps.size} amplitudes")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm}")
        self.amplitudes = amps
        self.qubit_count = n

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def copy(self) -> "StateVector":
        return _wrap(self.amplitudes.copy(), self.qubit_count)


def _wrap(amps: np.ndarray, n: int) -> StateVector:
    # internal constructor: amplitudes already known valid, skip __post_init__
    state = object.__new__(StateVector)
    state.amplitudes = amps
    state.qubit_count = n
    return state


def prepare(angles: BlochAngles) -> StateVector:
    """Single-qubit state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    half = angles.theta / 2.0
    amps = np.array(
        [math.cos(half), math.sin(half) * complex(math.cos(angles.phi), math.sin(angles.phi))],
        dtype=complex,
    )
    return StateVector(amps, 1)


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    """Combine registers; `a` occupies the lower qubit indices."""
    # little-endian: index = ia + ib * 2**a.qubit_count, hence kron(b, a)
    return StateVector(np.kron(b.amplitudes, a.amplitudes), a.qubit_count + b.qubit_count)


def haar_random(rng: np.random.Generator) -> BlochAngles:
    """Draw preparation angles uniformly over the Bloch sphere.

    Inverse-CDF sampling: theta = arccos(1 - 2u), phi = 2*pi*v.
    """
    u = rng.random()
    v = rng.random()
    return BlochAngles(math.acos(1.0 - 2.0 * u), TWO_PI * v)


def angle_between(a1: BlochAngles, a2: BlochAngles) -> float:
    """Angle between the two Bloch vectors, in [0, pi]."""
    dot = sum(x * y for x, y in zip(a1.bloch_vector(), a2.bloch_vector()))
    return math.acos(max(-1.0, min(1.0, dot)))


def fidelity(a1: BlochAngles, a2: BlochAngles) -> float:
    """Squared overlap |<psi1|psi2>|^2 = (1 + cos Theta) / 2."""
    return (1.0 + math.cos(angle_between(a1, a2))) / 2.0


def _check_qubit(state: StateVector, qubit: int):
    if not 0 <= qubit < state.qubit_count:
        raise IndexError(f"qubit {qubit} out of range for {state.qubit_count}-qubit register")


def _index_pairs(n: int, qubit: int):
    # slices (cheap views) for the lowest/highest qubit, index arrays otherwise
    if qubit == n - 1:
        half = 2 ** (n - 1)
        return slice(0, half), slice(half, 2**n)
    if qubit == 0:
        return slice(0, 2**n, 2), slice(1, 2**n, 2)
    idx = np.arange(2**n)
    lo = idx[(idx >> qubit) & 1 == 0]
    return lo, lo | (1 << qubit)


# index tables for every (register size, qubit) the simulator can touch
_PAIRS = {(n, q): _index_pairs(n, q) for n in (1, 2, 3) for q in range(n)}


def _cswap_indices(control: int, target_a: int, target_b: int) -> tuple[int, int]:
    # the single 3-qubit basis pair exchanged: control bit 1, targets (1,0) <-> (0,1)
    src = (1 << control) | (1 << target_a)
    dst = (1 << control) | (1 << target_b)
    return src, dst


_CSWAP = {
    (c, a, b): _cswap_indices(c, a, b)
    for c in range(3) for a in range(3) for b in range(3)
    if len({c, a, b}) == 3
}


# -- in-place amplitude kernels (shared by the public ops and the shot loop) --
# _PAIRS entries may be views; temporaries that outlive a write are copied.

def _hadamard_inplace(amps: np.ndarray, n: int, qubit: int):
    lo, hi = _PAIRS[(n, qubit)]
    a_lo = amps[lo].copy()
    a_hi = amps[hi]
    amps[lo] = (a_lo + a_hi) * _SQRT1_2
    amps[hi] = (a_lo - a_hi) * _SQRT1_2


def _pauli_inplace(amps: np.ndarray, n: int, qubit: int, which: int):
    lo, hi = _PAIRS[(n, qubit)]
    if which == 0:
        a_lo = amps[lo].copy()
        amps[lo] = amps[hi]
        amps[hi] = a_lo
    elif which == 1:
        a_lo = amps[lo].copy()
        amps[lo] = -1j * amps[hi]
        amps[hi] = 1j * a_lo
    else:
        amps[hi] = -1.0 * amps[hi]


def _cswap_inplace(amps: np.ndarray, n: int, control: int, target_a: int, target_b: int):
    src, dst = _CSWAP[(control, target_a, target_b)]
    amps[src], amps[dst] = amps[dst], amps[src]


def _depolarize_inplace(amps: np.ndarray, n: int, qubit: int, p: float,
                        rng: np.random.Generator):
    if p > 0.0 and rng.random() < p:
        _pauli_inplace(amps, n, qubit, int(rng.integers(3)))


def _damp_inplace(amps: np.ndarray, n: int, qubit: int, gamma: float,
                  rng: np.random.Generator):
    """Quantum-jump amplitude damping: jump |1> -> |0> with probability
    gamma * P(1), otherwise the no-jump Kraus branch, renormalized."""
    if gamma <= 0.0:
        return
    lo, hi = _PAIRS[(n, qubit)]
    a_hi = amps[hi]
    p_one = float(np.vdot(a_hi, a_hi).real)
    if rng.random() < gamma * p_one:
        amps[lo] = a_hi / math.sqrt(p_one)
        amps[hi] = 0.0
    else:
        norm = math.sqrt(1.0 - gamma * p_one)
        amps[hi] = a_hi * (math.sqrt(1.0 - gamma) / norm)
        amps[lo] = amps[lo] / norm


def _born_inplace(amps: np.ndarray, n: int, qubit: int, rng: np.random.Generator) -> int:
    lo, hi = _PAIRS[(n, qubit)]
    a_hi = amps[hi]
    p_one = float(np.vdot(a_hi, a_hi).real)
    outcome = 1 if rng.random() < p_one else 0
    p_branch = p_one if outcome == 1 else 1.0 - p_one
    if p_branch <= 1e-12:
        raise SimulationError(f"measured a branch with probability {p_branch}")
    scale = 1.0 / math.sqrt(p_branch)
    if outcome == 1:
        amps[lo] = 0.0
        amps[hi] = a_hi * scale
    else:
        amps[hi] = 0.0
        amps[lo] = amps[lo] * scale
    return outcome


# -- public pure operations --

def apply_hadamard(state: StateVector, qubit: int, noise: NoiseModel = IDEAL,
                   rng: np.random.Generator | None = None) -> StateVector:
    """Hadamard on one qubit, followed by optional depolarizing noise (p1)."""
    _check_qubit(state, qubit)
    n = state.qubit_count
    amps = state.amplitudes.copy()
    _hadamard_inplace(amps, n, qubit)
    if noise.p1 > 0.0:
        if rng is None:
            raise ValueError("rng required for a noisy gate")
        _depolarize_inplace(amps, n, qubit, noise.p1, rng)
    return _wrap(amps, n)


def apply_pauli_x(state: StateVector, qubit: int) -> StateVector:
    """Ideal X gate (used for conditional resets)."""
    _check_qubit(state, qubit)
    amps = state.amplitudes.copy()
    _pauli_inplace(amps, state.qubit_count, qubit, 0)
    return _wrap(amps, state.qubit_count)


def apply_controlled_swap(state: StateVector, control: int, target_a: int, target_b: int,
                          noise: NoiseModel = IDEAL,
                          rng: np.random.Generator | None = None) -> StateVector:
    """Controlled-SWAP, then independent depolarizing noise (p2) on each of the
    three participating qubits, drawn in (control, target_a, target_b) order."""
    n = state.qubit_count
    qubits = (control, target_a, target_b)
    if len(set(qubits)) != 3:
        raise IndexError("control and target qubits must be distinct")
    for q in qubits:
        _check_qubit(state, q)
    amps = state.amplitudes.copy()
    _cswap_inplace(amps, n, control, target_a, target_b)
    if noise.p2 > 0.0 or noise.p_damp > 0.0:
        if rng is None:
            raise ValueError("rng required for a noisy gate")
        if noise.p2 > 0.0:
            for q in qubits:
                _depolarize_inplace(amps, n, q, noise.p2, rng)
        if noise.p_damp > 0.0:
            for q in qubits:
                _damp_inplace(amps, n, q, noise.p_damp, rng)
    return _wrap(amps, n)


def born_measure(state: StateVector, qubit: int,
                 rng: np.random.Generator) -> tuple[int, StateVector]:
    """Projective Z measurement. Returns the true outcome and the renormalized
    post-measurement state (no readout error)."""
    _check_qubit(state, qubit)
    amps = state.amplitudes.copy()
    outcome = _born_inplace(amps, state.qubit_count, qubit, rng)
    return outcome, _wrap(amps, state.qubit_count)


def readout_flip(bit: int, noise: NoiseModel, rng: np.random.Generator) -> int:
    """Classical assignment error applied to a reported bit."""
    if noise.p_readout > 0.0 and rng.random() < noise.p_readout:
        return 1 - bit
    return bit


def measure_qubit(state: StateVector, qubit: int, noise: NoiseModel = IDEAL,
                  rng: np.random.Generator | None = None) -> tuple[int, StateVector]:
    """Born-rule measurement with readout error on the reported bit.

    The register collapses according to the true outcome; only the returned
    bit is flipped with probability p_readout.
    """
    if rng is None:
        raise ValueError("rng required for measurement")
    outcome, post = born_measure(state, qubit, rng)
    return readout_flip(outcome, noise, rng), post


def substream(master_seed: int, *indices: int) -> np.random.Generator:
    """Independent, reproducible child stream for (master_seed, indices)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(indices)))
