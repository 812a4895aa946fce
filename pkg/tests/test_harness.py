import json

import numpy as np
import pytest

from wigner_dfe import (
    ResourceError,
    SweepRow,
    ValidationError,
    build_run_plan,
    emit,
    run_sweep,
    run_trials,
)
from wigner_dfe.cli import dfe_main, magic_main, wigner_main
from wigner_dfe.harness import RUN_CSV_HEADER, SWEEP_CSV_HEADER, emit_trials_csv, sweep_spec_from_config


def run_config(**overrides):
    cfg = {
        "system": {"d": 3, "n": 1},
        "protocol": "state_stabilizer",
        "target": {"kind": "named", "name": "zero"},
        "noise": {"kind": "depolarizing", "p": 0.3},
        "epsilon": 0.25,
        "delta": 0.2,
        "seed": 42,
        "trials": 6,
    }
    cfg.update(overrides)
    return cfg


def sweep_config(**overrides):
    cfg = {
        "axis": "epsilon",
        "values": [0.4, 0.3, 0.2],
        "trials_per_point": 3,
        "base": run_config(trials=1),
    }
    cfg.update(overrides)
    return cfg


def test_build_run_plan_validation():
    with pytest.raises(ValidationError):
        build_run_plan({"system": {"d": 3, "n": 1}})
    with pytest.raises(ValidationError):
        build_run_plan(run_config(protocol="nonsense"))
    with pytest.raises(ValidationError):
        build_run_plan(run_config(trials=0))


def test_run_trials_worker_invariance():
    plan = build_run_plan(run_config())
    seq = run_trials(plan, workers=1)
    par = run_trials(plan, workers=8)
    assert seq == par
    assert [r.trial for r in seq] == list(range(6))


def test_sweep_spec_validation():
    with pytest.raises(ValidationError):
        sweep_spec_from_config(sweep_config(values=[]))
    with pytest.raises(ValidationError):
        sweep_spec_from_config(sweep_config(values=[0.2, 0.4, 0.3]))
    with pytest.raises(ValidationError):
        sweep_spec_from_config(sweep_config(trials_per_point=0))
    with pytest.raises(ValidationError):
        sweep_spec_from_config(sweep_config(axis="temperature"))


def test_sweep_budget_guard():
    sweep = sweep_spec_from_config(sweep_config(budget=10.0))
    with pytest.raises(ResourceError) as err:
        run_sweep(sweep)
    assert "budget" in str(err.value)


def test_stabilizer_protocol_sweep_totals_equal_K():
    from wigner_dfe.protocols import hoeffding_K

    rows = run_sweep(sweep_spec_from_config(sweep_config()))
    assert len(rows) == 3
    for row, eps in zip(rows, (0.4, 0.3, 0.2)):
        assert row.mean_total_samples == hoeffding_K(eps, 0.2)
        assert row.magic_delta == 1.0
        assert row.magic_chi_log == 0.0
        assert 0.0 <= row.coverage_fraction <= 1.0
        assert row.mean_total_samples <= row.bound_total_samples * 1.05


def test_magic_interpolation_sweep_monotone_samples():
    base = run_config(protocol="state_l1", epsilon=0.3, delta=0.3, trials=1)
    cfg = sweep_config(
        axis="magic_interpolation",
        values=[0.0, 0.25, 0.5, 0.75, 1.0],
        trials_per_point=50,
        base=base,
    )
    rows = run_sweep(sweep_spec_from_config(cfg))
    order = np.argsort([r.magic_delta for r in rows])
    totals = np.array([rows[i].mean_total_samples for i in order])
    assert np.all(np.diff(totals) >= 0)
    deltas = np.array([r.magic_delta for r in rows])
    assert deltas.min() == 1.0 and deltas.max() > 1.6


def test_emit_csv_header_and_determinism(tmp_path):
    rows = [
        SweepRow(0.3, 0.01, 0.97, 100.0, 140.0, 1.0, 0.0),
        SweepRow(0.2, 0.005, 1.0, 225.0, 260.0, 1.0, 0.0),
    ]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(rows, "csv", p1)
    emit(rows, "csv", p2)
    text = p1.read_text()
    assert text.splitlines()[0] == SWEEP_CSV_HEADER
    assert p1.read_bytes() == p2.read_bytes()
    assert "\r" not in text


def test_emit_json_shape(tmp_path):
    rows = [SweepRow(0.3, 0.01, 0.97, 100.0, 140.0, 1.0, 0.0)]
    path = tmp_path / "rows.json"
    emit(rows, "json", path, config={"axis": "epsilon"})
    doc = json.loads(path.read_text())
    assert set(doc) == {"config", "rows"}
    assert doc["config"] == {"axis": "epsilon"}
    assert doc["rows"][0]["coverage_fraction"] == 0.97


def test_emit_unknown_format(tmp_path):
    with pytest.raises(ValidationError):
        emit([], "xml", tmp_path / "x.xml")


def test_emit_unwritable_path():
    with pytest.raises(ValidationError):
        emit([], "csv", "/nonexistent-dir/results.csv")


def test_cli_run_csv(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(run_config()))
    out = tmp_path / "out.csv"
    assert dfe_main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == RUN_CSV_HEADER
    assert len(lines) == 7


def test_cli_run_worker_byte_identity(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(run_config(trials=8)))
    out1, out8 = tmp_path / "w1.csv", tmp_path / "w8.csv"
    assert dfe_main(["run", "--config", str(cfg), "--out", str(out1), "--workers", "1"]) == 0
    assert dfe_main(["run", "--config", str(cfg), "--out", str(out8), "--workers", "8"]) == 0
    assert out1.read_bytes() == out8.read_bytes()


def test_cli_run_plot(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(run_config(trials=4)))
    out = tmp_path / "out.csv"
    assert dfe_main(["run", "--config", str(cfg), "--out", str(out), "--plot"]) == 0
    assert (tmp_path / "out.png").exists()


def test_cli_sweep_csv_and_json(tmp_path):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps(sweep_config()))
    out_csv = tmp_path / "sweep.csv"
    out_json = tmp_path / "sweep.json.out"
    assert dfe_main(["sweep", "--config", str(cfg), "--out", str(out_csv), "--plot"]) == 0
    assert out_csv.read_text().splitlines()[0] == SWEEP_CSV_HEADER
    assert (tmp_path / "sweep.png").exists()
    assert (
        dfe_main(["sweep", "--config", str(cfg), "--out", str(out_json), "--format", "json"]) == 0
    )
    assert "rows" in json.loads(out_json.read_text())


def test_error_exit_code_mapping():
    from wigner_dfe import NumericalError, ResourceError, ValidationError, WignerDfeError

    assert ValidationError("x").exit_code == 2
    assert ResourceError("x").exit_code == 3
    assert NumericalError("x").exit_code == 4
    assert WignerDfeError("x").exit_code == 1


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(run_config(protocol="nonsense")))
    assert dfe_main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    tiny = tmp_path / "tiny.json"
    tiny.write_text(json.dumps(sweep_config(budget=1.0)))
    assert dfe_main(["sweep", "--config", str(tiny), "--out", str(tmp_path / "y.csv")]) == 3
    missing = tmp_path / "missing.json"
    assert dfe_main(["run", "--config", str(missing), "--out", str(tmp_path / "z.csv")]) == 2


def test_cli_wigner_dump_state_and_channel(tmp_path):
    cfg = tmp_path / "w.json"
    cfg.write_text(json.dumps({"system": {"d": 3, "n": 1}, "target": {"kind": "named", "name": "zero"}}))
    out = tmp_path / "w.csv"
    assert wigner_main(["dump", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "flat_index,coords,value"
    assert len(lines) == 10
    cfg.write_text(
        json.dumps({"system": {"d": 3, "n": 1}, "target": {"kind": "named", "name": "identity"}})
    )
    assert wigner_main(["dump", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 82


def test_cli_magic_report(tmp_path, capsys):
    cfg = tmp_path / "m.json"
    cfg.write_text(
        json.dumps({"system": {"d": 3, "n": 1}, "target": {"kind": "named", "name": "strange_state"}})
    )
    assert magic_main(["report", "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"mana", "wigner_rank", "log_wigner_rank", "support_size", "threshold"}
    assert doc["wigner_rank"] == 9


def test_emit_trials_round_trip(tmp_path):
    plan = build_run_plan(run_config(trials=3))
    records = run_trials(plan)
    path = tmp_path / "t.csv"
    emit_trials_csv(records, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 4
    fields = lines[1].split(",")
    assert fields[0] == "0" and fields[7] == "42"


def test_sweep_axes_delta_and_noise():
    rows_delta = run_sweep(
        sweep_spec_from_config(sweep_config(axis="delta", values=[0.3, 0.2, 0.1]))
    )
    assert [r.axis_value for r in rows_delta] == [0.3, 0.2, 0.1]
    # tighter delta costs more samples for the Hoeffding-stage protocol
    totals = [r.mean_total_samples for r in rows_delta]
    assert totals[0] < totals[1] < totals[2]
    rows_noise = run_sweep(
        sweep_spec_from_config(sweep_config(axis="noise_p", values=[0.1, 0.5, 0.9]))
    )
    # heavier depolarizing noise drags the measured error upward on average
    assert rows_noise[0].mean_abs_error < rows_noise[-1].mean_abs_error


def test_cli_wigner_dump_noisy_channel(tmp_path):
    cfg = tmp_path / "wn.json"
    cfg.write_text(
        json.dumps(
            {
                "system": {"d": 3, "n": 1},
                "target": {"kind": "named", "name": "fourier"},
                "noise": {"kind": "depolarizing", "p": 0.2},
            }
        )
    )
    out = tmp_path / "wn.csv"
    assert wigner_main(["dump", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 82
    # noisy permutation: diagonalish weights 0.8 + 0.2/9 on the permuted entries
    values = [float(line.split(",")[2]) for line in lines[1:]]
    assert max(values) < 1.0 and max(values) > 0.8
