import json
import subprocess
import sys

import numpy as np
import pytest

from qqueue.cli import main
from qqueue.io import read_csv


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


SIM = {
    "dims": {"d_i": 2, "d_o": 2, "d_q": 4},
    "coin": {"kind": "hadamard"},
    "initial_state": "paper-initial",
    "run": {"t_max": 30, "eps": 1e-6, "checkpoint_every": 10},
}


def test_simulate_outputs(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, SIM)
    assert main(["simulate", cfg, "--out", str(out), "--format", "csv", "--format", "json", "--format", "svg"]) == 0
    header, data = read_csv(out / "trajectory.csv")
    assert header == ["t", "p0", "p1", "p2", "p3"] and data.shape == (31, 5)
    np.testing.assert_allclose(data[:, 1:].sum(axis=1), 1, atol=1e-12)
    np.testing.assert_array_equal(np.loadtxt(out / "heatmap.dat"), data[:, 1:])
    report = json.loads((out / "report.json").read_text())
    assert report["metadata"]["config"]["dims"] == {"d_i": 2, "d_o": 2, "d_q": 4}
    assert report["operator_level"]["t_final"] == 30
    traj = json.loads((out / "trajectory.json").read_text())
    assert sorted(int(k) for k in traj["states"]) == [0, 10, 20, 30]
    assert (out / "heatmap.svg").read_text().startswith("<svg")


def test_simulate_prints_summary(tmp_path, capsys):
    main(["simulate", write_config(tmp_path, SIM), "--out", str(tmp_path / "o")])
    assert "operator norm at t_max" in capsys.readouterr().out


def test_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("QQUEUE_OUT_DIR", str(tmp_path / "env"))
    assert main(["simulate", write_config(tmp_path, SIM)]) == 0
    assert (tmp_path / "env" / "trajectory.csv").exists()


def test_simulate_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, {**SIM, "initial_state": "hs-random", "seed": 7})
    main(["simulate", cfg, "--out", str(tmp_path / "a")])
    main(["simulate", cfg, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()
    main(["simulate", cfg, "--out", str(tmp_path / "c"), "--seed", "8"])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() != (tmp_path / "c" / "trajectory.csv").read_bytes()


def test_spectrum(tmp_path):
    out = tmp_path / "s"
    cfg = write_config(tmp_path, {"dims": {"d_i": 2, "d_o": 2, "d_q": 3}, "coin": "hadamard"})
    assert main(["spectrum", cfg, "--out", str(out)]) == 0
    _, rows = read_csv(out / "spectrum.csv")
    assert rows.shape == (144, 3)
    assert rows[:, 2].max() <= 1 + 1e-9
    doc = json.loads((out / "classification.json").read_text())
    assert doc["classification"] in ("case1", "case2")


def test_spectrum_gate_exit_code(tmp_path):
    cfg = write_config(tmp_path, {"dims": {"d_i": 4, "d_o": 4, "d_q": 10},
                                  "coin": {"kind": "walsh_hadamard", "n": 2}})
    out = tmp_path / "big"
    assert main(["spectrum", cfg, "--out", str(out)]) == 3
    assert not out.exists()


def test_spectrum_leading_only_large(tmp_path):
    cfg = write_config(tmp_path, {"dims": {"d_i": 2, "d_o": 2, "d_q": 20}, "coin": "hadamard"})
    out = tmp_path / "lead"
    assert main(["spectrum", cfg, "--out", str(out), "--leading-only"]) == 0
    _, rows = read_csv(out / "spectrum.csv")
    assert abs(rows[0, 2] - 1) < 1e-8
    assert json.loads((out / "classification.json").read_text())["partial"] is True


def test_classical_matrix(tmp_path):
    out = tmp_path / "m"
    cfg = write_config(tmp_path, {"dims": {"d_i": 4, "d_o": 4, "d_q": 10}, "coin": {"kind": "dft", "d": 4}})
    assert main(["classical-matrix", cfg, "--out", str(out)]) == 0
    _, m = read_csv(out / "stochastic_matrix.csv")
    np.testing.assert_allclose(m, 0.25, atol=1e-15)
    assert json.loads((out / "stochastic_matrix.json").read_text())["tp_verified"]


MC = {
    "dims": {"d_i": 2, "d_o": 2, "d_q": 3},
    "coin": "hadamard",
    "mode": "classical",
    "montecarlo": {"n_samples": 4, "seed": 3, "t_max": 2000},
}


def test_montecarlo(tmp_path):
    out = tmp_path / "mc"
    assert main(["montecarlo", write_config(tmp_path, MC), "--out", str(out), "--format", "csv",
                 "--format", "json"]) == 0
    header, data = read_csv(out / "montecarlo.csv")
    assert header == ["bin", "mean", "stddev"] and data.shape == (3, 3)
    meta = json.loads((out / "montecarlo.json").read_text())["metadata"]
    assert meta["seed"] == 3 and "PCG64" in meta["generator"]


def test_montecarlo_workers_bit_identical(tmp_path):
    cfg = write_config(tmp_path, MC)
    main(["montecarlo", cfg, "--out", str(tmp_path / "w1"), "--workers", "1"])
    main(["montecarlo", cfg, "--out", str(tmp_path / "w2"), "--workers", "2"])
    assert (tmp_path / "w1" / "montecarlo.csv").read_bytes() == (tmp_path / "w2" / "montecarlo.csv").read_bytes()


def test_montecarlo_no_convergence_exit_code(tmp_path):
    doc = {**MC, "mode": "quantum", "montecarlo": {"n_samples": 2, "seed": 0, "t_max": 3, "eps": 1e-12}}
    assert main(["montecarlo", write_config(tmp_path, doc), "--out", str(tmp_path / "x")]) == 4


@pytest.mark.parametrize("doc, fragment", [
    ({"dims": {"d_i": 2, "d_o": 2, "d_q": 2}, "run": {}}, "dims"),
    ({"dims": {"d_i": 2, "d_o": 2}, "run": {}}, "dims.d_q"),
    ({"dims": {"d_i": 2, "d_o": 2, "d_q": 4}, "coin": "sideways", "run": {}}, "coin.kind"),
    ({**SIM, "montecarlo": {}}, "run/montecarlo"),
    ({**SIM, "run": {"t_max": "long"}}, "run.t_max"),
    ({**SIM, "initial_state": "nowhere"}, "initial_state"),
    ({**SIM, "output": {"formats": ["png"]}}, "output.formats"),
    ({**SIM, "colour": "blue"}, "unknown"),
])
def test_config_errors(tmp_path, capsys, doc, fragment):
    out = tmp_path / "never"
    assert main(["simulate", write_config(tmp_path, doc), "--out", str(out)]) == 2
    assert fragment in capsys.readouterr().err
    assert not out.exists()


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dims": {\n  "d_i": 2,,\n}')
    assert main(["simulate", str(path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["simulate", str(tmp_path / "absent.json")]) == 2


def test_output_path_is_a_file(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["simulate", write_config(tmp_path, SIM), "--out", str(blocker)]) == 2


def test_simulate_without_run_section(tmp_path):
    doc = {k: v for k, v in SIM.items() if k != "run"}
    assert main(["simulate", write_config(tmp_path, doc), "--out", str(tmp_path / "o")]) == 2


def test_console_script_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "qqueue.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
