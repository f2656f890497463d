"""Command-line driver for the experiment suite.

The CLI is a thin client: it builds a validated RunConfig, obtains a result
model (locally, or from a running service via --server), and writes the
rendered files. No command writes anything until its run completed, so a
failure never leaves partial output behind.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import pydantic

from .presets import PRESETS
from .reports import render_result
from .schemas import COMMAND_RESULT_MODELS, ExperimentError, RunConfig
from .stats import FitError

COMMANDS = {
    "decay": "per-round decay of the test register for identical and orthogonal pairs",
    "sweep": "observable vs pair angle, with the quality-parameter fit",
    "threshold": "identical-pair observable population and acceptance threshold",
    "attack": "probe-forge-verify campaign with bill security table",
    "bill": "binomial bill thresholds and acceptance probabilities",
    "table1": "quality/threshold/forgery summary over all bundled presets",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qvault",
        description="simulate and verify SWAP-test token authentication",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--seed", type=int, default=20260401)
        cmd.add_argument("--shots", type=int, default=1000)
        cmd.add_argument("--states", type=int, default=400)
        cmd.add_argument("--repetitions", type=int, default=20,
                         help="SWAP-test rounds N per shot")
        cmd.add_argument("--noise-preset", choices=sorted(PRESETS))
        cmd.add_argument("--p1", type=float)
        cmd.add_argument("--p2", type=float)
        cmd.add_argument("--p-readout", type=float)
        cmd.add_argument("--p-damp", type=float)
        cmd.add_argument("--pb-target", type=float, default=0.99)
        cmd.add_argument("--bill-M", dest="bill_total", type=int, default=20)
        cmd.add_argument("--type2-target", type=float, default=1e-4)
        cmd.add_argument("--sweep-points", type=int, default=20)
        cmd.add_argument("--forged-rate", type=float,
                         help="per-token forged acceptance rate for the bill command")
        cmd.add_argument("--tau", dest="tau_override", type=float,
                         help="force the attack verifier threshold instead of calibrating")
        cmd.add_argument("--out", type=Path, default=Path("qvault-out"))
        cmd.add_argument("--server",
                         help="base URL of a running qvault service; runs remotely when given")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        shots=args.shots,
        states=args.states,
        repetitions=args.repetitions,
        noise_preset=args.noise_preset,
        p1=args.p1,
        p2=args.p2,
        p_readout=args.p_readout,
        p_damp=args.p_damp,
        pb_target=args.pb_target,
        bill_total=args.bill_total,
        type2_target=args.type2_target,
        sweep_points=args.sweep_points,
        forged_token_rate=args.forged_rate,
        tau_override=args.tau_override,
    )


def obtain_result(command: str, config: RunConfig, server: str | None):
    if server is None:
        from .experiments import run_command

        return run_command(command, config)
    import httpx

    response = httpx.post(
        f"{server.rstrip('/')}/experiments/{command}",
        json=config.model_dump(),
        timeout=None,
    )
    if response.status_code != 200:
        raise ExperimentError(f"service returned {response.status_code}: {response.text}")
    return COMMAND_RESULT_MODELS[command].model_validate(response.json())


def write_files(out_dir: Path, files: dict[str, str]) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in files.items():
        path = out_dir / name
        path.write_text(content)
        written.append(path)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except pydantic.ValidationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        result = obtain_result(args.command, config, args.server)
        files = render_result(args.command, result)
    except (ExperimentError, FitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in write_files(args.out, files):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
