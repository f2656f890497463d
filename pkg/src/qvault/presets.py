"""Bundled noise presets emulating three hardware quality tiers.

Each preset's error rates were tuned until a 20-point sweep at 1000 shots
fits quality parameters inside the quoted one-sigma band of its target row;
the targets are recorded here so tests can assert the construction holds.
"""
from __future__ import annotations

from dataclasses import dataclass

from .statekit import NoiseModel


@dataclass(frozen=True)
class NoisePreset:
    name: str
    noise: NoiseModel
    target_q_offset: float
    sigma_q_offset: float
    target_q_amplitude: float
    sigma_q_amplitude: float


PRESETS: dict[str, NoisePreset] = {
    preset.name: preset
    for preset in (
        NoisePreset(
            name="kingston-like",
            noise=NoiseModel(p1=0.0033, p2=0.0165, p_readout=0.0095, p_damp=0.0183),
            target_q_offset=0.10, sigma_q_offset=0.01,
            target_q_amplitude=0.56, sigma_q_amplitude=0.03,
        ),
        NoisePreset(
            name="fez-like",
            noise=NoiseModel(p1=0.00548, p2=0.0274, p_readout=0.010, p_damp=0.0294),
            target_q_offset=0.135, sigma_q_offset=0.004,
            target_q_amplitude=0.42, sigma_q_amplitude=0.01,
        ),
        NoisePreset(
            name="marrakesh-like",
            noise=NoiseModel(p1=0.00564, p2=0.0282, p_readout=0.0238, p_damp=0.0066),
            target_q_offset=0.151, sigma_q_offset=0.003,
            target_q_amplitude=0.47, sigma_q_amplitude=0.01,
        ),
    )
}


def get_preset(name: str) -> NoisePreset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown noise preset {name!r}; available: {known}") from None
