"""HTTP facade over the vault protocol and the experiment runners.

The service owns the bank state: an in-memory vault of issued token pairs and
the acceptance policy calibrated for its configured noise. Authentication
responses expose serial, observable and verdict only; preparation angles
never cross the interface.

Experiment endpoints are stateless: they execute a seeded RunConfig and
return the same payload an in-process run produces.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .. import __version__
from ..calibration import AcceptancePolicy, CalibrationError, calibrate_threshold
from ..experiments import run_command
from ..protocol import BillPolicy, TokenConsumedError, UnknownSerialError, Vault
from ..schemas import (
    AttackResult,
    BillResult,
    DecayResult,
    ExperimentError,
    RunConfig,
    SweepResult,
    Table1Result,
    ThresholdResult,
)
from ..statekit import NoiseModel, substream


class ConfigureRequest(BaseModel):
    seed: int = 20260401
    noise_preset: Optional[str] = None
    p1: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    p2: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    p_readout: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    p_damp: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    repetitions: int = Field(default=20, ge=1)
    calibration_states: int = Field(default=100, ge=50)
    calibration_shots: int = Field(default=200, ge=1)
    pb_target: float = Field(default=0.99, gt=0.0, lt=1.0)

    def run_config(self) -> RunConfig:
        return RunConfig(
            seed=self.seed,
            noise_preset=self.noise_preset,
            p1=self.p1, p2=self.p2, p_readout=self.p_readout, p_damp=self.p_damp,
            repetitions=self.repetitions,
            states=self.calibration_states,
            shots=self.calibration_shots,
            pb_target=self.pb_target,
        )


class PolicyResponse(BaseModel):
    tau: float
    tau_uncertainty: float
    p_b_target: float
    repetitions: int
    shots_per_authentication: int


class IssueRequest(BaseModel):
    count: int = Field(default=1, ge=1, le=10_000)


class IssueResponse(BaseModel):
    serials: list[str]


class AuthenticationResponse(BaseModel):
    serial: str
    observable: float
    accepted: bool


class BillAuthRequest(BaseModel):
    serials: list[str]
    minimum_accepted: int = Field(ge=0)


class BillAuthResponse(BaseModel):
    accepted_count: int
    accepted: bool


class StatusResponse(BaseModel):
    version: str
    configured: bool
    issued_tokens: int


class BankState:
    """Mutable service state: noise, calibrated policy, vault, request rng."""

    def __init__(self):
        self.noise: NoiseModel | None = None
        self.policy: AcceptancePolicy | None = None
        self.vault = Vault()
        self._rng: np.random.Generator | None = None

    def configure(self, request: ConfigureRequest) -> AcceptancePolicy:
        noise = request.run_config().noise_model()
        policy = calibrate_threshold(
            noise, request.repetitions, request.calibration_shots,
            request.calibration_states, request.pb_target,
            substream(request.seed, 0))
        self.noise = noise
        self.policy = policy
        self.vault = Vault()
        self._rng = substream(request.seed, 1)
        return policy

    def require_ready(self):
        if self.policy is None or self.noise is None or self._rng is None:
            raise HTTPException(status_code=409, detail="bank is not calibrated yet")

    @property
    def rng(self) -> np.random.Generator:
        assert self._rng is not None
        return self._rng


def create_app() -> FastAPI:
    app = FastAPI(title="qvault", version=__version__)
    state = BankState()

    @app.get("/health", response_model=StatusResponse)
    def health():
        return StatusResponse(
            version=__version__,
            configured=state.policy is not None,
            issued_tokens=len(state.vault),
        )

    @app.post("/vault/configure", response_model=PolicyResponse)
    def configure(request: ConfigureRequest):
        try:
            policy = state.configure(request)
        except (CalibrationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return PolicyResponse(
            tau=policy.tau,
            tau_uncertainty=policy.tau_uncertainty,
            p_b_target=policy.p_b_target,
            repetitions=policy.repetitions,
            shots_per_authentication=policy.shots_per_authentication,
        )

    @app.get("/vault/policy", response_model=PolicyResponse)
    def get_policy():
        state.require_ready()
        policy = state.policy
        return PolicyResponse(
            tau=policy.tau,
            tau_uncertainty=policy.tau_uncertainty,
            p_b_target=policy.p_b_target,
            repetitions=policy.repetitions,
            shots_per_authentication=policy.shots_per_authentication,
        )

    @app.post("/vault/tokens", response_model=IssueResponse)
    def issue_tokens(request: IssueRequest):
        state.require_ready()
        serials = [state.vault.issue(state.rng) for _ in range(request.count)]
        return IssueResponse(serials=serials)

    @app.post("/vault/tokens/{serial}/authenticate", response_model=AuthenticationResponse)
    def authenticate(serial: str):
        state.require_ready()
        try:
            result = state.vault.authenticate(serial, state.policy, state.noise, state.rng)
        except UnknownSerialError:
            raise HTTPException(status_code=404, detail=f"unknown serial {serial}")
        except TokenConsumedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return AuthenticationResponse(
            serial=result.serial,
            observable=result.observable,
            accepted=result.accepted,
        )

    @app.post("/vault/bills/authenticate", response_model=BillAuthResponse)
    def authenticate_bill(request: BillAuthRequest):
        state.require_ready()
        if not request.serials:
            raise HTTPException(status_code=422, detail="a bill needs at least one token")
        try:
            bill = BillPolicy(total=len(request.serials),
                              minimum_accepted=request.minimum_accepted)
            accepted_count, accepted = state.vault.authenticate_bill(
                request.serials, state.policy, bill, state.noise, state.rng)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except UnknownSerialError as exc:
            raise HTTPException(status_code=404, detail=f"unknown serial {exc.args[0]}")
        except TokenConsumedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return BillAuthResponse(accepted_count=accepted_count, accepted=accepted)

    def _run(command: str, config: RunConfig):
        try:
            return run_command(command, config)
        except ExperimentError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/experiments/decay", response_model=DecayResult)
    def decay(config: RunConfig):
        return _run("decay", config)

    @app.post("/experiments/sweep", response_model=SweepResult)
    def sweep(config: RunConfig):
        return _run("sweep", config)

    @app.post("/experiments/threshold", response_model=ThresholdResult)
    def threshold(config: RunConfig):
        return _run("threshold", config)

    @app.post("/experiments/attack", response_model=AttackResult)
    def attack(config: RunConfig):
        return _run("attack", config)

    @app.post("/experiments/bill", response_model=BillResult)
    def bill(config: RunConfig):
        return _run("bill", config)

    @app.post("/experiments/table1", response_model=Table1Result)
    def table1(config: RunConfig):
        return _run("table1", config)

    return app


app = create_app()
