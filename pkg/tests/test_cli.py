import json
import subprocess
import sys

import numpy as np
import pytest

from tl1it.cli import ConfigError, GenSpec, load_config, run_cli
from tl1it.harness import ExperimentSpec, RobustnessSpec
from tl1it.problems import ProblemInstance
from tl1it.solvers import Scheme, SolverConfig

COMMANDS = ["gen", "solve", "success-rate", "robustness", "prox-table"]


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


class TestLoadConfig:
    def test_empty_solve_config(self, tmp_path):
        with pytest.raises(ConfigError, match="scheme missing"):
            load_config(write_json(tmp_path / "c.json", {}), kind="solve")

    def test_defaults(self, tmp_path):
        cfg = load_config(write_json(tmp_path / "c.json", {"scheme": "S2", "k": 10}), kind="solve")
        assert isinstance(cfg, SolverConfig)
        assert cfg.scheme is Scheme.S2 and cfg.k == 10
        assert (cfg.a, cfg.mu_eps, cfg.max_iter, cfg.rel_tol, cfg.warm_start_iters) == (
            1.0, 0.01, 3000, 1e-8, 20
        )

    def test_override_wins(self, tmp_path):
        path = write_json(tmp_path / "c.json", {"scheme": "S2", "k": 10, "rel_tol": 1e-4})
        assert load_config(path, ["rel_tol=1e-6"], kind="solve").rel_tol == 1e-6
        assert load_config(path, {"rel_tol": 1e-6}, kind="solve").rel_tol == 1e-6

    def test_lambda_alias(self):
        cfg = load_config(None, {"scheme": "S1", "lambda": 0.3}, kind="solve")
        assert cfg.lam == 0.3

    def test_unknown_key(self, tmp_path):
        path = write_json(tmp_path / "c.json", {"scheme": "S2", "k": 3, "tolerance": 1})
        with pytest.raises(ConfigError, match="tolerance"):
            load_config(path, kind="solve")
        with pytest.raises(ConfigError, match="bogus"):
            load_config(None, {"noise": {"sigma": 0.1, "bogus": 1}}, kind="success-rate")

    def test_missing_and_invalid_files(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(str(tmp_path / "nope.json"), kind="solve")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(str(bad), kind="solve")
        with pytest.raises(ConfigError, match="object"):
            load_config(write_json(tmp_path / "l.json", [1, 2]), kind="solve")

    def test_invalid_values(self):
        with pytest.raises(ConfigError):
            load_config(None, {"trials": 0}, kind="success-rate")

    def test_experiment_kinds(self):
        spec = load_config(
            None,
            ["family=dct", "sweep=[8]", "noise.sigma=0.01", "noise.linf_cap=0.01"],
            kind="success-rate",
        )
        assert isinstance(spec, ExperimentSpec)
        assert spec.family == "dct" and spec.sweep == (8.0,)
        assert spec.noise.sigma == 0.01 and spec.noise.linf_cap == 0.01
        assert isinstance(load_config(None, None, kind="robustness"), RobustnessSpec)
        assert isinstance(load_config(None, None, kind="gen"), GenSpec)


class TestCommands:
    def test_help(self, capsys):
        for cmd in COMMANDS:
            assert run_cli([cmd, "--help"]) == 0
            out = capsys.readouterr().out
            assert "--out" in out
        assert run_cli(["--help"]) == 0

    def test_help_lists_flags(self, capsys):
        run_cli(["success-rate", "--help"])
        out = capsys.readouterr().out
        for flag in ("--config", "--seed", "--threads", "--scheme", "--k", "--trials", "--M", "--N", "--r", "--F"):
            assert flag in out

    def test_usage_errors(self, capsys):
        assert run_cli([]) == 1
        assert run_cli(["frobnicate"]) == 1
        assert run_cli(["prox-table", "--lambda", "x"]) == 1
        assert run_cli(["prox-table", "--lambda", "-1"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_prox_table(self, tmp_path):
        out = tmp_path / "fig2.csv"
        assert run_cli(["prox-table", "--lambda", "0.5", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,soft,half,tl1_a2,tl1_a1"
        assert len(lines) == 602

    def test_solve_missing_config(self, tmp_path, capsys):
        out = tmp_path / "res.json"
        code = run_cli(["solve", "--config", str(tmp_path / "missing.json"), "--out", str(out)])
        assert code == 1
        assert not out.exists()
        assert "missing.json" in capsys.readouterr().err

    def test_success_rate_deterministic(self, tmp_path):
        cfg = write_json(
            tmp_path / "gauss_r0.json",
            {"family": "gaussian", "M": 40, "N": 80, "k_grid": [2, 4], "trials": 2, "schemes": ["S2", "HardIT"]},
        )
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(["success-rate", "--config", cfg, "--seed", "7", "--out", str(a)]) == 0
        assert run_cli(["success-rate", "--config", cfg, "--seed", "7", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) == 1 + 2 * 2
        c = tmp_path / "c.csv"
        assert run_cli(["success-rate", "--config", cfg, "--seed", "7", "--threads", "2", "--out", str(c)]) == 0
        assert a.read_bytes() == c.read_bytes()

    def test_flags_override_config(self, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"M": 40, "N": 80, "k_grid": [2], "trials": 3})
        out = tmp_path / "o.csv"
        args = ["success-rate", "--config", cfg, "--trials", "1", "--scheme", "S3", "--out", str(out)]
        assert run_cli(args) == 0
        rows = out.read_text().splitlines()[1:]
        assert rows == ["S3,gaussian,0,2,1,1,1"]

    def test_unknown_config_key_exit(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "c.json", {"trails": 3})
        assert run_cli(["success-rate", "--config", cfg]) == 1
        assert "trails" in capsys.readouterr().err

    def test_gen_then_solve(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        assert run_cli(["gen", "--M", "40", "--N", "100", "--k", "3", "--seed", "3", "--out", str(inst_path)]) == 0
        inst = ProblemInstance.from_json(inst_path.read_text())
        assert inst.A.shape == (40, 100) and np.count_nonzero(inst.x_true) == 3
        res_path = tmp_path / "res.json"
        assert run_cli(["solve", "--instance", str(inst_path), "--scheme", "S2", "--out", str(res_path)]) == 0
        doc = json.loads(res_path.read_text())
        assert doc["scheme"] == "S2" and doc["converged"]
        assert doc["rel_error"] <= 1e-3
        np.testing.assert_allclose(doc["x"], inst.x_true, atol=1e-4)

    def test_solve_s1_with_lambda(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        run_cli(["gen", "--M", "30", "--N", "60", "--k", "2", "--out", str(inst_path)])
        res_path = tmp_path / "res.json"
        args = ["solve", "--instance", str(inst_path), "--scheme", "S1", "--lambda", "1.0", "--out", str(res_path)]
        assert run_cli(args) == 0
        doc = json.loads(res_path.read_text())
        assert doc["objective_history"] and doc["fixed_point_residual"] <= 1e-6

    def test_solve_bad_k_is_runtime_failure(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        run_cli(["gen", "--M", "10", "--N", "20", "--k", "2", "--out", str(inst_path)])
        assert run_cli(["solve", "--instance", str(inst_path), "--scheme", "S2", "--k", "20"]) == 2

    def test_gen_is_deterministic(self, tmp_path, capsys):
        run_cli(["gen", "--family", "dct", "--M", "20", "--N", "80", "--F", "2", "--k", "2", "--seed", "9"])
        a = capsys.readouterr().out
        run_cli(["gen", "--family", "dct", "--M", "20", "--N", "80", "--F", "2", "--k", "2", "--seed", "9"])
        assert capsys.readouterr().out == a

    def test_threads_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TL1_THREADS", "many")
        assert run_cli(["success-rate", "--M", "20", "--N", "40", "--k", "2", "--trials", "1"]) == 1

    def test_robustness(self, tmp_path):
        out = tmp_path / "rob.csv"
        args = ["robustness", "--N", "64", "--M", "40", "--k", "3", "--k", "6", "--trials", "1",
                "--set", "true_k=3", "--set", "max_iter=300", "--out", str(out)]
        assert run_cli(args) == 0
        assert out.read_text().splitlines()[0] == "scheme,M,k_est,trials,mse"

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tl1it", "prox-table", "--num", "3"],
            capture_output=True, text=True, check=False,
        )
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[2] == "0,0,0,0,0"
