import json
import subprocess
import sys

import pytest

from gamowkit.cli import main, parse_times, UsageError


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


@pytest.fixture
def models(tmp_path):
    return {
        r: write(tmp_path / f"m{r}.json", {"poles": [{"e_r": 10.0, "gamma": 1.0, "order": r}]})
        for r in (1, 2)
    }


def run(*argv):
    return main([str(a) for a in argv])


class TestParseTimes:
    def test_ok(self):
        assert parse_times("0:5:11") == (0.0, 5.0, 11)

    @pytest.mark.parametrize("raw", ["0:5", "a:b:c", "0:5:0", "5:0:3"])
    def test_bad(self, raw):
        with pytest.raises(UsageError):
            parse_times(raw)


class TestConfig:
    def test_flags_override_config(self, tmp_path, models, capsys):
        cfg = write(tmp_path / "run.json", {"model": models[1].name, "times": "0:5:51", "tol": 1e-3,
                                            "out": "from_config"})
        assert run("decay", "--config", cfg, "--tol", "1e-9") == 0
        side = json.loads((tmp_path / "from_config" / "decay.json").read_text())
        assert side["tolerances"]["gamma_relative"] == 1e-9

    def test_relative_paths_follow_config(self, tmp_path, models, monkeypatch):
        sub = tmp_path / "elsewhere"
        sub.mkdir()
        monkeypatch.chdir(sub)
        cfg = write(tmp_path / "run.json", {"model": "m1.json", "out": "o"})
        assert run("decay", "--config", cfg) == 0
        assert (tmp_path / "o" / "decay.csv").exists()

    def test_missing_config(self, tmp_path, capsys):
        assert run("decay", "--config", tmp_path / "nope.json") == 2
        assert "not found" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path):
        (tmp_path / "bad.json").write_text("{")
        assert run("decay", "--config", tmp_path / "bad.json") == 2

    def test_missing_model(self, tmp_path):
        assert run("decay", "--model", tmp_path / "nope.json", "--out", tmp_path) == 2

    def test_no_model(self, tmp_path):
        assert run("decay", "--out", tmp_path) == 2

    @pytest.mark.parametrize("tol", ["0", "-1"])
    def test_nonpositive_tol(self, tmp_path, models, tol):
        assert run("decay", "--model", models[1], "--tol", tol, "--out", tmp_path) == 2

    def test_bad_model_content(self, tmp_path):
        m = write(tmp_path / "m.json", {"poles": [{"e_r": 1.0, "gamma": -1.0}]})
        assert run("decay", "--model", m, "--out", tmp_path) == 2

    def test_unknown_command(self):
        assert run("frobnicate") == 2


class TestDecay:
    def test_prints_fit(self, tmp_path, models, capsys):
        assert run("decay", "--model", models[1], "--times", "0:5:51", "--out", tmp_path) == 0
        out = capsys.readouterr().out
        gamma = float(out.split("gamma_fit = ")[1].split()[0])
        tau = float(out.split("tau = ")[1].split()[0])
        assert abs(gamma - 1) <= 1e-10 and abs(tau * gamma - 1) <= 1e-10
        side = json.loads((tmp_path / "decay.json").read_text())
        assert set(side) >= {"gamma_fit", "fit_residual", "window", "tolerances"}
        assert side["normalised"] is False

    def test_golden_pass_and_fail(self, tmp_path, models, golden_dir):
        golden = golden_dir / "decay_gamma1.csv"
        assert run("decay", "--model", models[1], "--times", "0:5:51", "--golden", golden, "--out", tmp_path) == 0
        bad = tmp_path / "bad.csv"
        lines = golden.read_text().splitlines()
        t, p = lines[3].split(",")
        lines[3] = f"{t},{float(p) * (1 + 1e-6)!r}"
        bad.write_text("\n".join(lines) + "\n")
        assert run("decay", "--model", models[1], "--times", "0:5:51", "--golden", bad, "--out", tmp_path) == 1

    def test_detector_from_config(self, tmp_path, models):
        cfg = write(tmp_path / "c.json", {
            "model": str(models[1]),
            "grid": {"e0": -190.0, "e_max": 210.0, "n": 4096},
            "detector": {"rational": {"poles": [[10.0, -2.0], [12.0, -1.0]], "residues": [[1.0, 0.0], [0.0, 1.0]]}},
        })
        assert run("decay", "--config", cfg, "--out", tmp_path) == 0

    def test_lower_hardy_detector_fails_contract(self, tmp_path, models):
        cfg = write(tmp_path / "c.json", {
            "model": str(models[1]),
            "grid": {"e0": -190.0, "e_max": 210.0, "n": 4096},
            "detector": {"rational": {"poles": [[10.0, 2.0]], "residues": [[1.0, 0.0]]}},
        })
        assert run("decay", "--config", cfg, "--out", tmp_path) == 1

    def test_bad_operator(self, tmp_path, models):
        assert run("decay", "--model", models[1], "--operator", "rho", "--out", tmp_path) == 2

    def test_pole_index(self, tmp_path, models):
        assert run("decay", "--model", models[1], "--pole", "3", "--out", tmp_path) == 2


class TestJordanDemo:
    def test_outputs(self, tmp_path, models):
        assert run("jordan-demo", "--model", models[2], "--out", tmp_path) == 0
        summary = json.loads((tmp_path / "jordan_demo.json").read_text())
        entry = summary["poles"][0]
        assert entry["propagator_max_residual"] <= 1e-12
        assert entry["negative_control_at_lifetime"] >= 0.1
        for name in ("hamiltonian.json", "pole0_propagator_residuals.csv", "pole0_exponential_law.csv",
                     "pole0_negative_control.csv"):
            assert (tmp_path / name).exists()

    def test_impossible_tol_is_contract_failure(self, tmp_path, models):
        assert run("jordan-demo", "--model", models[2], "--tol", "1e-30", "--out", tmp_path) == 1


class TestCompare:
    def test_unitary_mode_allows_negative(self, tmp_path, models):
        assert run("compare-unitary", "--model", models[1], "--mode", "unitary",
                   "--times", "-5:30:71", "--out", tmp_path) == 0

    def test_summary(self, tmp_path, models):
        assert run("compare-unitary", "--model", models[1], "--out", tmp_path) == 0
        s = json.loads((tmp_path / "compare.json").read_text())
        assert s["excess_ratio_last"] >= 1e3
        assert s["crossover_time"] > 5.0
        assert s["tolerances"]["short_time_agreement"] == 0.05


class TestEvolve:
    @pytest.mark.parametrize("op", ["W_PT", "W_G", "W_n:0", "W_n:1", "dyad:1,1"])
    def test_operators(self, tmp_path, models, op):
        assert run("evolve", "--model", models[2], "--operator", op, "--out", tmp_path) == 0
        assert json.loads((tmp_path / "evolve.json").read_text())["max_oracle_residual"] <= 1e-12

    @pytest.mark.parametrize("op", ["W_n:5", "dyad:0", "rho"])
    def test_bad_operator(self, tmp_path, models, op):
        assert run("evolve", "--model", models[2], "--operator", op, "--out", tmp_path) == 2

    def test_negative_time(self, tmp_path, models):
        assert run("evolve", "--model", models[2], "--times", "-1:1:3", "--out", tmp_path) == 2


class TestCheckHardy:
    def test_file_input(self, tmp_path):
        from gamowkit import EnergyGrid, Rational, WaveFunction
        from gamowkit.io import write_wavefunction_csv

        g = EnergyGrid(-40.0, 40.0, 4096)
        write_wavefunction_csv(WaveFunction.from_rational(g, Rational.from_poles([2 - 1j], [1.0])), tmp_path / "psi.csv")
        cfg = write(tmp_path / "c.json", {"wavefunctions": [{"name": "psi", "file": "psi.csv", "expect": "upper"}]})
        assert run("check-hardy", "--config", cfg, "--out", tmp_path) == 0
        report = json.loads((tmp_path / "hardy_report.json").read_text())
        assert report["functions"][0]["upper"]["is_hardy"] is True

    def test_bad_expectation(self, tmp_path):
        cfg = write(tmp_path / "c.json", {"grid": {"e0": -1, "e_max": 1, "n": 64},
                                          "wavefunctions": [{"rational": {"num": [1], "den": [1]}, "expect": "maybe"}]})
        assert run("check-hardy", "--config", cfg, "--out", tmp_path) == 2


def test_module_entry_point(tmp_path, models):
    proc = subprocess.run([sys.executable, "-m", "gamowkit", "decay", "--model", str(models[1]),
                           "--times", "-1:5:10", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "t >= 0" in proc.stderr
