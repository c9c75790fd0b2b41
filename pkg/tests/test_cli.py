import json
import subprocess
import sys

import numpy as np
import pytest

from rieszeq import cli
from rieszeq.discrete import Configuration, energy
from rieszeq.kernels import ExternalField, RieszParams


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_examples(capsys):
    code, out, _ = run(capsys, "solve", "--d", "4", "--s", "0", "--alpha", "3", "--gamma", "1")
    data = json.loads(out)
    assert code == 0 and data["variant"] == "SphereUniform"
    assert data["parameters"]["R"] == pytest.approx(0.5503, abs=1e-4)
    code, out, _ = run(capsys, "solve", "--d", "3", "--s", "-1", "--alpha", "0.5", "--gamma", "1")
    assert code == 3 and json.loads(out)["variant"] == "NonExistent"
    code, out, _ = run(capsys, "solve", "--d", "5", "--s", "2", "--alpha", "2", "--gamma", "1")
    assert code == 2 and json.loads(out)["variant"] == "Unknown"


def test_invalid_parameters_exit_1(capsys):
    assert run(capsys, "solve", "--d", "4", "--s", "-3", "--alpha", "2")[0] == 1
    assert run(capsys, "solve", "--d", "4", "--s", "0")[0] == 1
    assert run(capsys, "solve", "--d", "4", "--s", "0", "--alpha", "-1")[0] == 1
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "solve", "--d", "4", "--s", "0", "--alpha", "4", "--p", "4")[0] == 1


def test_frostman_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "frostman", "--d", "4", "--s", "0", "--alpha", "3",
                       "--grid-n", "60", "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["report"]["verdict"] == "pass"
    lines = (tmp_path / "frostman.csv").read_text().splitlines()
    assert lines[0] == "lambda,phi,phi_prime,method" and len(lines) == 61
    code, _, _ = run(capsys, "frostman", "--d", "4", "--s", "0", "--alpha", "3",
                     "--grid-n", "60", "--radius-scale", "0.5")
    assert code == 4
    code, out, _ = run(capsys, "frostman", "--d", "3", "--s", "-1", "--alpha", "1", "--gamma", "1")
    assert code == 0 and json.loads(out)["report"]["constant_c"] == 0


def test_identity_examples(capsys):
    args = ["identity", "--d", "2", "3", "4", "5", "6", "--lams", "0", "0.25", "0.5", "0.75", "1"]
    code, out, _ = run(capsys, *args, "--tol", "1e-6")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "d,lambda,residual" and len(lines) == 26
    assert run(capsys, *args, "--tol", "1e-300")[0] == 4
    assert run(capsys, "identity", "--d", "1")[0] == 1


def test_sample_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", "--d", "4", "--s", "0", "--alpha", "3", "--n", "50", "--seed", "3")
    assert code == 0
    cfg = Configuration.from_csv(out)
    assert np.allclose(cfg.norms(), (1 / 6) ** (1 / 3), atol=1e-12)
    again = run(capsys, "sample", "--d", "4", "--s", "0", "--alpha", "3", "--n", "50", "--seed", "3")[1]
    assert again == out
    code, out, _ = run(capsys, "sample", "--d", "4", "--s", "0", "--alpha", "1", "--n", "20000", "--seed", "1")
    norms = Configuration.from_csv(out).norms()
    frac = np.mean(norms >= 2 / 3 * (1 - 1e-12))
    assert abs(frac - 0.5) < 4 * np.sqrt(0.25 / 20000)
    assert run(capsys, "sample", "--d", "5", "--s", "2", "--alpha", "2")[0] == 2


def test_minimize_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "minimize", "--d", "4", "--s", "0", "--alpha", "3", "--n", "60",
                       "--starts", "2", "--seed", "7", "--max-iter", "150", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert (tmp_path / "summary.csv").read_text().splitlines()[0] == "alpha,theoretical_R,empirical_R"
    assert (tmp_path / "histogram.csv").read_text().splitlines()[0] == "bin_lo,bin_hi,count"
    cfg = Configuration.from_csv(tmp_path / "points.csv")
    e = energy(cfg, RieszParams(4, 0), ExternalField(1, 3))
    assert e == pytest.approx(summary["best_energy"], abs=1e-9)
    assert run(capsys, "minimize", "--d", "4", "--s", "0", "--alpha", "2", "--n", "0")[0] == 1


def test_minimize_lp_field_projected(capsys, tmp_path):
    code, out, _ = run(capsys, "minimize", "--d", "4", "--s", "0", "--p", "4", "--alpha", "4",
                       "--n", "40", "--starts", "1", "--max-iter", "80", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "projected.csv").read_text().splitlines()
    assert lines[0] == "x2,x3,x4" and len(lines) == 41


def test_minimize_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for target in (a, b):
        run(capsys, "minimize", "--d", "3", "--s", "1", "--alpha", "2", "--n", "30", "--starts", "2",
            "--seed", "4", "--max-iter", "60", "--out", str(target))
    assert (a / "points.csv").read_bytes() == (b / "points.csv").read_bytes()


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 4, "s": 0, "alpha": 3, "gamma": 1}))
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 0 and json.loads(out)["parameters"]["R"] == pytest.approx((1 / 6) ** (1 / 3))
    code, out, _ = run(capsys, "solve", "--config", str(cfg), "--alpha", "2")
    assert json.loads(out)["parameters"]["R"] == pytest.approx(0.5)


def test_output_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    code, _, _ = run(capsys, "identity", "--d", "3", "--lams", "0.5")
    assert code == 0
    assert (tmp_path / "env" / "identity.csv").read_text().startswith("d,lambda,residual")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rieszeq", "solve", "--d", "5", "--s", "2",
                           "--alpha", "2"], capture_output=True, text=True)
    assert proc.returncode == 2
