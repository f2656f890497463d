"""Deterministic rendering of experiment results into CSV and report files.

Every file starts with a provenance block (package version plus the full run
config) so a data file is self-describing. Floats are written with repr,
which round-trips exactly; identical configs therefore produce byte-identical
files no matter whether the run happened in-process or behind the service.
"""
from __future__ import annotations

from . import __version__
from .schemas import (
    AttackResult,
    BillResult,
    CurveData,
    DecayResult,
    RunConfig,
    SweepResult,
    Table1Result,
    ThresholdResult,
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def provenance_lines(command: str, config: RunConfig) -> list[str]:
    lines = [f"# qvault {__version__}", f"# command = {command}"]
    for name, value in config.model_dump().items():
        lines.append(f"# {name} = {_fmt(value)}")
    return lines


def render_csv(command: str, config: RunConfig, header: list[str],
               rows: list[tuple]) -> str:
    lines = provenance_lines(command, config)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def render_report(command: str, config: RunConfig, entries: list[tuple[str, object]]) -> str:
    lines = provenance_lines(command, config)
    for key, value in entries:
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def histogram_rows(values: list[float], repetitions: int) -> list[tuple]:
    """Counts over bins of width 1/N covering [0, 1].

    Bins are left-closed right-open with the final bin closed, so observable
    values landing exactly on an edge bin deterministically.
    """
    edges = [k / repetitions for k in range(repetitions + 1)]
    counts = [0] * repetitions
    for v in values:
        k = min(int(v * repetitions), repetitions - 1)
        counts[k] += 1
    return [(edges[k], edges[k + 1], counts[k]) for k in range(repetitions)]


def _curve_entries(curve: CurveData) -> list[tuple[str, object]]:
    entries = []
    prefix = f"fit.{curve.label}"
    if curve.fit is None:
        entries.append((f"{prefix}.converged", False))
        return entries
    entries.append((f"{prefix}.converged", True))
    for name, value in curve.fit.parameters.items():
        entries.append((f"{prefix}.{name}", value))
        entries.append((f"{prefix}.{name}.sigma", curve.fit.standard_deviations[name]))
    entries.append((f"{prefix}.residual_norm", curve.fit.residual_norm))
    return entries


def decay_files(result: DecayResult) -> dict[str, str]:
    files = {}
    entries: list[tuple[str, object]] = []
    for curve in result.curves:
        rows = list(zip(curve.n, curve.c_bar, curve.stderr))
        files[f"decay_{curve.label}.csv"] = render_csv(
            "decay", result.config, ["n", "c_bar", "stderr"], rows)
        entries.extend(_curve_entries(curve))
    files["decay_report.txt"] = render_report("decay", result.config, entries)
    return files


def sweep_files(result: SweepResult) -> dict[str, str]:
    rows = [(p.theta, p.c_bar, p.stderr) for p in result.points]
    quality = result.quality
    report = render_report("sweep", result.config, [
        ("q_offset", quality.q_offset),
        ("q_offset.sigma", quality.sigma_q_offset),
        ("q_amplitude", quality.q_amplitude),
        ("q_amplitude.sigma", quality.sigma_q_amplitude),
    ])
    return {
        "sweep.csv": render_csv("sweep", result.config, ["theta", "c_bar", "stderr"], rows),
        "sweep_report.txt": report,
    }


def _policy_entries(policy) -> list[tuple[str, object]]:
    return [
        ("tau", policy.tau),
        ("tau.sigma", policy.tau_uncertainty),
        ("p_b_target", policy.p_b_target),
        ("repetitions", policy.repetitions),
        ("shots_per_authentication", policy.shots_per_authentication),
    ]


def threshold_files(result: ThresholdResult) -> dict[str, str]:
    rows = histogram_rows(result.samples, result.config.repetitions)
    report = render_report("threshold", result.config, [
        *_policy_entries(result.policy),
        ("coverage_below_tau", result.coverage_below_tau),
        ("n_samples", len(result.samples)),
    ])
    return {
        "threshold_hist.csv": render_csv(
            "threshold", result.config, ["bin_left", "bin_right", "count"], rows),
        "threshold_report.txt": report,
    }


def attack_files(result: AttackResult) -> dict[str, str]:
    config = result.config
    genuine = histogram_rows(result.genuine_observables, config.repetitions)
    forged = histogram_rows(result.forged_observables, config.repetitions)
    entries: list[tuple[str, object]] = [
        ("p_f", result.p_f),
        ("q_offset", result.quality.q_offset),
        ("q_amplitude", result.quality.q_amplitude),
        *_policy_entries(result.policy),
    ]
    for row in result.bill_table:
        prefix = f"bill.M={row.total}"
        entries.append((f"{prefix}.m", row.minimum_accepted))
        entries.append((f"{prefix}.genuine_accept", row.genuine_accept_probability))
        entries.append((f"{prefix}.forged_accept", row.forged_accept_probability))
    return {
        "attack_genuine_hist.csv": render_csv(
            "attack", config, ["bin_left", "bin_right", "count"], genuine),
        "attack_forged_hist.csv": render_csv(
            "attack", config, ["bin_left", "bin_right", "count"], forged),
        "attack_report.txt": render_report("attack", config, entries),
    }


def bill_files(result: BillResult) -> dict[str, str]:
    entries: list[tuple[str, object]] = [
        ("M", result.total),
        ("m", result.minimum_accepted),
        ("genuine_accept_probability", result.genuine_accept_probability),
    ]
    if result.forged_token_rate is not None:
        entries.append(("forged_token_rate", result.forged_token_rate))
        entries.append(("forged_accept_probability", result.forged_accept_probability))
    return {"bill_report.txt": render_report("bill", result.config, entries)}


def table1_files(result: Table1Result) -> dict[str, str]:
    header = ["preset", "q_offset", "sigma_q_offset", "q_amplitude", "sigma_q_amplitude",
              "tau", "tau_uncertainty", "p_f", "forged_bill_20", "forged_bill_200"]
    rows = [
        (r.preset, r.q_offset, r.sigma_q_offset, r.q_amplitude, r.sigma_q_amplitude,
         r.tau, r.tau_uncertainty, r.p_f, r.forged_bill_20, r.forged_bill_200)
        for r in result.rows
    ]
    report_entries: list[tuple[str, object]] = [
        ("m.M=20", result.minimum_accepted_20),
        ("m.M=200", result.minimum_accepted_200),
    ]
    for r in result.rows:
        report_entries.extend([
            (f"{r.preset}.q_offset", r.q_offset),
            (f"{r.preset}.q_amplitude", r.q_amplitude),
            (f"{r.preset}.tau", r.tau),
            (f"{r.preset}.p_f", r.p_f),
            (f"{r.preset}.forged_bill_20", r.forged_bill_20),
            (f"{r.preset}.forged_bill_200", r.forged_bill_200),
        ])
    return {
        "table1.csv": render_csv("table1", result.config, header, rows),
        "table1_report.txt": render_report("table1", result.config, report_entries),
    }


RENDERERS = {
    "decay": decay_files,
    "sweep": sweep_files,
    "threshold": threshold_files,
    "attack": attack_files,
    "bill": bill_files,
    "table1": table1_files,
}


def render_result(command: str, result) -> dict[str, str]:
    """File name -> file content for one finished run."""
    return RENDERERS[command](result)
