import json

import numpy as np
import pytest

from geoadapt.model import IntegrationDiverged
from geoadapt.scenario import config_from_dict, flip_doc, hover_doc
from geoadapt.sim import (EmptyLog, RunLog, gain_report, log_columns, monotonicity_violations,
                          run_scenario, summarize)


def _diverging_doc():
    doc = hover_doc(2.0)
    doc.update(gains={"k_Omega": 1e4}, dt=0.01, initial_state={"axis_angle": [0.3, 0.0, 0.0]},
               params={"f_max": 1e9})
    return doc


@pytest.fixture(scope="module")
def flip_run():
    return run_scenario(config_from_dict(flip_doc()))


def test_hover_equilibrium_stays_put():
    runlog, metrics = run_scenario(config_from_dict(hover_doc(1.0)))
    for name in ("ex", "ev", "eR", "eW"):
        assert np.max(runlog.norm(name)) < 1e-9, name
    assert metrics.terminal_ex < 1e-9 and metrics.max_psi < 1e-9


def test_log_schema(flip_run):
    runlog, _ = flip_run
    assert runlog.columns == log_columns(3)
    assert runlog.data.shape == (2001, len(runlog.columns))
    assert np.all(np.diff(runlog["t"]) > 0)
    header = runlog.header
    for key in ("config_hash", "gain_report_digest", "gains_passed", "failed_conditions"):
        assert key in header


def test_rotation_logged_row_major(flip_run):
    runlog, _ = flip_run
    R = runlog.block(*(f"R{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)))[100].reshape(3, 3)
    assert np.allclose(R.T @ R, np.eye(3), atol=1e-9)
    assert np.isclose(np.linalg.det(R), 1.0)


def test_csv_round_trip(flip_run, tmp_path):
    runlog, metrics = flip_run
    path = tmp_path / "log.csv"
    runlog.to_csv(path)
    back = RunLog.from_csv(path)
    assert back.columns == runlog.columns
    assert back.header == json.loads(json.dumps(runlog.header))
    assert np.array_equal(back.data, runlog.data, equal_nan=True)
    assert summarize(back) == metrics
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    assert len({line.count(",") for line in lines[1:]}) == 1


def test_runs_are_bit_identical():
    doc = flip_doc()
    doc["duration"] = 0.6
    doc["schedule"][1]["end"] = 0.6
    a, _ = run_scenario(config_from_dict(doc))
    b, _ = run_scenario(config_from_dict(doc))
    assert a.to_csv_text() == b.to_csv_text()


def test_flip_error_discontinuous_at_switch(flip_run):
    runlog, metrics = flip_run
    ps = runlog["psi"]
    k = int(np.searchsorted(runlog["t"], 0.375))
    assert abs(ps[k] - ps[k - 1]) > 0.1  # reference switches from R_d to R_c
    assert metrics.max_psi == np.max(ps)


def test_estimate_stays_in_ball(flip_run):
    runlog, _ = flip_run
    cfg = config_from_dict(flip_doc())
    assert np.max(np.linalg.norm(runlog.block("thx1", "thx2", "thx3"), axis=1)) <= cfg.gains.B_theta + 1e-12


def test_failing_gains_are_flagged_not_fatal(flip_run):
    runlog, _ = flip_run
    rep = gain_report(config_from_dict(flip_doc()))
    assert runlog.header["gains_passed"] == rep.passed
    assert runlog.header["failed_conditions"] == [c.name for c in rep.conditions if not c.passed]


def test_no_adaptation_freezes_estimates():
    doc = flip_doc(adaptive=False)
    doc["duration"] = 0.5
    doc["schedule"][1]["end"] = 0.5
    runlog, _ = run_scenario(config_from_dict(doc))
    th = runlog.block("thx1", "thx2", "thx3", "thR1", "thR2", "thR3")
    assert np.array_equal(th, np.zeros_like(th))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_carries_partial_log():
    with pytest.raises(IntegrationDiverged) as info:
        run_scenario(config_from_dict(_diverging_doc()))
    part = info.value.runlog
    assert 0 < len(part) < 201
    assert np.all(np.isfinite(part["t"]))


def _synthetic(n, saturated_rows=()):
    cols = log_columns(3)
    data = np.zeros((n, len(cols)))
    data[:, cols.index("t")] = np.arange(n) * 1e-3
    data[:, cols.index("mode")] = 1.0
    data[:, cols.index("in_domain")] = 1.0
    for k in saturated_rows:
        data[k, cols.index("saturated")] = 1.0
    return RunLog(cols, data)


def test_summary_of_equilibrium_record():
    m = summarize(_synthetic(1))
    assert m.terminal_ex == 0 and m.terminal_psi == 0 and m.max_psi == 0
    assert m.steady_state_ex == 0 and m.lyapunov_violations == 0


def test_saturation_duty_counts_steps():
    assert summarize(_synthetic(40, [7])).saturation_duty == pytest.approx(1 / 40)


def test_summary_rejects_empty_log():
    with pytest.raises(EmptyLog):
        summarize(_synthetic(0))


def test_monotonicity_counter():
    log = _synthetic(5)
    V = log.columns.index("V")
    log.data[:, V] = [1.0, 0.9, 0.95, 0.8, 0.8]
    assert list(monotonicity_violations(log)) == [1]
    log.data[2, log.columns.index("in_domain")] = 0.0
    assert monotonicity_violations(log).size == 0
