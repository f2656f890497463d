"""Experiment runners: payload shapes, determinism, and report rendering."""
import pytest

from qvault.experiments import run_attack, run_bill, run_decay, run_sweep, run_threshold
from qvault.reports import histogram_rows, render_result
from qvault.schemas import ExperimentError, RunConfig

FAST = dict(seed=5, shots=40, states=50, repetitions=8, sweep_points=6,
            p1=0.002, p2=0.012, p_readout=0.01, p_damp=0.008)


def test_run_config_rejects_preset_with_rates():
    with pytest.raises(ValueError):
        RunConfig(noise_preset="kingston-like", p2=0.01)
    with pytest.raises(ValueError):
        RunConfig(noise_preset="atlantis-like")


def test_run_config_preset_resolution():
    config = RunConfig(noise_preset="fez-like")
    noise = config.noise_model()
    assert noise.p2 == 0.0274
    bare = RunConfig()
    assert bare.noise_model().is_ideal


def test_decay_runs_and_fits():
    result = run_decay(RunConfig(**dict(FAST, repetitions=20, shots=300)))
    labels = {c.label for c in result.curves}
    assert labels == {"identical", "orthogonal"}
    orthogonal = next(c for c in result.curves if c.label == "orthogonal")
    assert len(orthogonal.n) == 20
    assert orthogonal.c_bar[0] > orthogonal.c_bar[-1]
    assert orthogonal.fit is not None


def test_sweep_deterministic_per_seed():
    a = run_sweep(RunConfig(**FAST))
    b = run_sweep(RunConfig(**FAST))
    assert a == b
    c = run_sweep(RunConfig(**dict(FAST, seed=6)))
    assert c != a


def test_threshold_coverage_field():
    result = run_threshold(RunConfig(**FAST))
    assert len(result.samples) == 50
    assert 0 < result.policy.tau < 1
    assert result.coverage_below_tau == pytest.approx(0.98, abs=0.03)


def test_threshold_noiseless_raises():
    with pytest.raises(ExperimentError):
        run_threshold(RunConfig(seed=1, shots=20, states=50, repetitions=5))


def test_attack_payload():
    result = run_attack(RunConfig(**FAST))
    assert len(result.forged_observables) == 50
    assert 0 <= result.p_f <= 1
    totals = [row.total for row in result.bill_table]
    assert totals == [10, 20, 50, 100, 200]
    forged = [row.forged_accept_probability for row in result.bill_table]
    assert all(a >= b for a, b in zip(forged, forged[1:]))


def test_bill_defaults_and_rate():
    result = run_bill(RunConfig(seed=1))
    assert (result.total, result.minimum_accepted) == (20, 17)
    result = run_bill(RunConfig(seed=1, bill_total=200, forged_token_rate=0.5))
    assert result.minimum_accepted == 191
    assert 0 <= result.forged_accept_probability < 1e-30


def test_histogram_rows_edges_and_counts():
    rows = histogram_rows([0.0, 0.05, 0.05, 0.999, 1.0], 20)
    assert len(rows) == 20
    assert rows[0] == (0.0, 0.05, 1)
    assert rows[1][2] == 2
    assert rows[-1][2] == 2  # final bin closed: both 0.999 and 1.0
    assert sum(r[2] for r in rows) == 5


def test_render_files_deterministic():
    result = run_threshold(RunConfig(**FAST))
    files_a = render_result("threshold", result)
    files_b = render_result("threshold", run_threshold(RunConfig(**FAST)))
    assert files_a == files_b
    assert set(files_a) == {"threshold_hist.csv", "threshold_report.txt"}
    assert files_a["threshold_hist.csv"].startswith("# qvault ")
