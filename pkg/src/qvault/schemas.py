"""Pydantic models shared by the CLI and the HTTP service.

RunConfig is the single validated description of an experiment; result models
are plain data so a run can be executed in-process or behind the service and
serialized identically either way.
"""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .presets import PRESETS
from .statekit import NoiseModel


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 20260401
    shots: int = Field(default=1000, ge=1)
    states: int = Field(default=400, ge=1)
    repetitions: int = Field(default=20, ge=1)
    noise_preset: Optional[str] = None
    p1: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    p2: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    p_readout: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    p_damp: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    pb_target: float = Field(default=0.99, gt=0.0, lt=1.0)
    bill_total: int = Field(default=20, ge=1)
    type2_target: float = Field(default=1e-4, gt=0.0, lt=1.0)
    sweep_points: int = Field(default=20, ge=5)
    forged_token_rate: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    # diagnostic: force the attack verifier's threshold instead of calibrating
    tau_override: Optional[float] = Field(default=None, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _preset_or_rates(self):
        explicit = [v is not None for v in (self.p1, self.p2, self.p_readout, self.p_damp)]
        if self.noise_preset is not None:
            if any(explicit):
                raise ValueError("give either a noise preset or explicit rates, not both")
            if self.noise_preset not in PRESETS:
                known = ", ".join(sorted(PRESETS))
                raise ValueError(f"unknown noise preset {self.noise_preset!r} (known: {known})")
        return self

    def noise_model(self) -> NoiseModel:
        if self.noise_preset is not None:
            return PRESETS[self.noise_preset].noise
        return NoiseModel(
            p1=self.p1 or 0.0,
            p2=self.p2 or 0.0,
            p_readout=self.p_readout or 0.0,
            p_damp=self.p_damp or 0.0,
        )


class FitReport(BaseModel):
    parameters: dict[str, float]
    standard_deviations: dict[str, float]
    residual_norm: float


class CurveData(BaseModel):
    label: str
    n: list[int]
    c_bar: list[float]
    stderr: list[float]
    fit: Optional[FitReport] = None


class DecayResult(BaseModel):
    config: RunConfig
    curves: list[CurveData]


class SweepPointData(BaseModel):
    theta: float
    c_bar: float
    stderr: float


class QualityReport(BaseModel):
    q_offset: float
    q_amplitude: float
    sigma_q_offset: float
    sigma_q_amplitude: float


class SweepResult(BaseModel):
    config: RunConfig
    points: list[SweepPointData]
    quality: QualityReport


class PolicyReport(BaseModel):
    tau: float
    tau_uncertainty: float
    p_b_target: float
    repetitions: int
    shots_per_authentication: int


class ThresholdResult(BaseModel):
    config: RunConfig
    samples: list[float]
    policy: PolicyReport
    coverage_below_tau: float


class BillTableRow(BaseModel):
    total: int
    minimum_accepted: int
    genuine_accept_probability: float
    forged_accept_probability: float


class AttackResult(BaseModel):
    config: RunConfig
    policy: PolicyReport
    quality: QualityReport
    genuine_observables: list[float]
    forged_observables: list[float]
    p_f: float
    bill_table: list[BillTableRow]


class BillResult(BaseModel):
    config: RunConfig
    total: int
    minimum_accepted: int
    genuine_accept_probability: float
    forged_accept_probability: Optional[float] = None
    forged_token_rate: Optional[float] = None


class HardwareRow(BaseModel):
    preset: str
    q_offset: float
    sigma_q_offset: float
    q_amplitude: float
    sigma_q_amplitude: float
    tau: float
    tau_uncertainty: float
    p_f: float
    forged_bill_20: float
    forged_bill_200: float


class Table1Result(BaseModel):
    config: RunConfig
    minimum_accepted_20: int
    minimum_accepted_200: int
    rows: list[HardwareRow]


class ExperimentError(Exception):
    """A run could not produce a complete result (bad config or failed fit)."""


COMMAND_RESULT_MODELS: dict[str, type[BaseModel]] = {
    "decay": DecayResult,
    "sweep": SweepResult,
    "threshold": ThresholdResult,
    "attack": AttackResult,
    "bill": BillResult,
    "table1": Table1Result,
}
