import csv
import json
import subprocess
import sys

import pytest

from pipeslip.cli import main

COMMAND_CONFIGS = {
    "solve-linear": "[linear]\nphi = 1\nxi = 1\nalpha = 1\n",
    "solve-swirl": "[swirl]\nphi = 100\nxi = 2\nalpha = 1\n",
    "sweep": "[sweep]\nphis = 100, 1000, 10000\nxis = 1\nalphas = 1\n",
    "inequalities": "[inequalities]\nn_samples = 50\n",
    "regimes": "[regimes]\nphis = 10000\nxis = 0.0001, 1, 50\nalphas = 0\n",
    "solve-nonlinear": "[nonlinear]\nphi = 10\nalpha = 1\nperiod_length = 6.283185307179586\nn_modes = 9\nn_points = 48\n",
}


def run(tmp_path, command, text, name="run", extra=()):
    cfg = tmp_path / f"{name}.ini"
    cfg.write_text(text)
    out = tmp_path / name
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


def snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_minimal_linear(tmp_path):
    code, out = run(tmp_path, "solve-linear", COMMAND_CONFIGS["solve-linear"])
    assert code == 0
    doc = json.loads((out / "record.json").read_text())
    assert doc["config"]["linear"]["phi"] == 1.0
    assert doc["config"]["command"] == "solve-linear"
    assert max(doc["record"]["identity_gaps"]) <= 1e-6
    lines = (out / "profiles.csv").read_text().splitlines()
    assert lines[0].startswith("# schema_version") and lines[1].startswith("# config")
    assert lines[2].split(",")[:3] == ["r", "re_psi", "im_psi"]


@pytest.mark.parametrize(
    "text",
    [
        "[linear]\nphi = abc\n",
        "[linear]\nn_points = 4\n",
        "[linear]\nphi = 1\nbogus = 3\n",
        "[sweep]\nphi = 1\n",
        "[linear]\nphi = -1\n",
        "[run]\nschema_version = 9\n",
        "not an ini file at all",
    ],
)
def test_config_errors_exit_2(tmp_path, text):
    code, _ = run(tmp_path, "solve-linear", text)
    assert code == 2


def test_empty_sweep_exit_2(tmp_path):
    code, _ = run(tmp_path, "sweep", "[sweep]\nphis =\nxis = 1\nalphas = 1\n")
    assert code == 2


def test_missing_config_file_exit_2(tmp_path):
    assert main(["regimes", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 2


def test_bad_threads_exit_2(tmp_path):
    code, _ = run(tmp_path, "regimes", "", extra=("--threads", "0"))
    assert code == 2


def test_swirl_without_slip_exit_2(tmp_path):
    code, _ = run(tmp_path, "solve-swirl", "[swirl]\nalpha = 0\n")
    assert code == 2


def test_three_point_sweep(tmp_path):
    code, out = run(tmp_path, "sweep", COMMAND_CONFIGS["sweep"])
    assert code == 0
    records = json.loads((out / "records.json").read_text())
    assert len(records["records"]) == 3 and records["rejected"] == []
    fits = json.loads((out / "fits.json").read_text())
    assert {f["quantity"] for f in fits["fits"]} == {"v_r_norm", "dz_v_z_norm", "h1", "h2"}
    rows = [r for r in (out / "fits.csv").read_text().splitlines() if not r.startswith("#")]
    assert len(rows) == 1 + 4


def test_sweep_with_failing_triple(tmp_path):
    code, out = run(tmp_path, "sweep", "[sweep]\nphis = 1, 10000\nxis = 30\nalphas = 1\nn_points = 48\n")
    assert code == 0
    records = json.loads((out / "records.json").read_text())
    assert len(records["records"]) == 1
    assert [(r["phi"], r["xi"]) for r in records["rejected"]] == [(10000.0, 30.0)]
    assert "gate" in records["rejected"][0]["reason"]


def test_regimes_table(tmp_path):
    code, out = run(tmp_path, "regimes", COMMAND_CONFIGS["regimes"])
    assert code == 0
    lines = [l for l in (out / "regimes.csv").read_text().splitlines() if not l.startswith("#")]
    table = {float(row["xi"]): row["regime"] for row in csv.DictReader(lines)}
    assert table == {1e-4: "LowFrequency", 1.0: "MidIntermediateSlip", 50.0: "HighFrequency"}


def test_inequalities_seeded_twice(tmp_path):
    code1, out1 = run(tmp_path, "inequalities", COMMAND_CONFIGS["inequalities"], "a", ("--seed", "11"))
    code2, out2 = run(tmp_path, "inequalities", COMMAND_CONFIGS["inequalities"], "b", ("--seed", "11"))
    assert code1 == code2 == 0
    assert snapshot(out1) == snapshot(out2)
    doc = json.loads((out1 / "inequalities.json").read_text())
    assert doc["config"]["run"]["seed"] == 11


def test_nonlinear_zero_forcing(tmp_path):
    code, out = run(tmp_path, "solve-nonlinear", COMMAND_CONFIGS["solve-nonlinear"] + "amplitude = 0\n")
    assert code == 0
    doc = json.loads((out / "trace.json").read_text())
    assert doc["trace"]["iterations"] == 1
    assert doc["field_norms"]["l2"] == 0.0


def test_nonlinear_even_modes_rejected(tmp_path):
    code, _ = run(tmp_path, "solve-nonlinear", "[nonlinear]\nn_modes = 8\nn_points = 32\n")
    assert code == 2


def test_json_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"linear": {"phi": 10, "xi": 0.5, "alpha": 2, "forcing": "polynomial", "p_r": [1, -1], "p_z": [0, 1]}}))
    out = tmp_path / "o"
    assert main(["solve-linear", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "record.json").read_text())
    assert doc["config"]["linear"]["p_r"] == [1.0, -1.0]
    assert doc["record"]["forcing_norm"] == pytest.approx(1.0)


@pytest.mark.parametrize("command", sorted(COMMAND_CONFIGS))
def test_deterministic_outputs(tmp_path, command):
    text = COMMAND_CONFIGS[command]
    _, a = run(tmp_path, command, text, "first")
    _, b = run(tmp_path, command, text, "second")
    snap_a, snap_b = snapshot(a), snapshot(b)
    assert snap_a and snap_a == snap_b


def test_threaded_sweep_matches_serial(tmp_path):
    _, a = run(tmp_path, "sweep", COMMAND_CONFIGS["sweep"], "serial")
    _, b = run(tmp_path, "sweep", COMMAND_CONFIGS["sweep"], "threaded", ("--threads", "3"))
    assert snapshot(a) == snapshot(b)


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "r.ini"
    cfg.write_text(COMMAND_CONFIGS["regimes"])
    proc = subprocess.run(
        [sys.executable, "-m", "pipeslip", "regimes", "--config", str(cfg), "--out", str(tmp_path / "m")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m" / "regimes.json").exists()
