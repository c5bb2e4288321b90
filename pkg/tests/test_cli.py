from pathlib import Path

import pytest
import yaml

from drds.cli.app import ExitCode, run
from drds.cli.oracles import ORACLES, OracleResult
from drds.util import load_yaml_document

_SCALAR = """\
name: scalar
model: {n: 1, m: 1, d: 1, N: 2, A: 1.0, B: 1.0, D: 1.0}
initial_state: [1.0]
cost: {Q: 1.0, R: 1.0}
noise: {sigma_w_step: 0.01, epsilon: 0.05, seed: 2}
constraints:
  - {alpha: [1.0], offset: -2.0, gamma: 0.1, steps: [1, 2]}
terminal: {mu_f: [0.0], Sigma_f: 1.0, delta: 1.0}
montecarlo: {T: 40}
"""


def _make_scenario(tmp_path: Path, text: str = _SCALAR) -> Path:
    path = tmp_path / "scalar.scenario"
    path.write_text(text)
    return path


class TestUsage:
    def test_missing_command(self) -> None:
        assert run([]) == ExitCode.BAD_INPUT

    def test_unknown_option(self) -> None:
        assert run(["solve", "x.scenario", "--bogus"]) == ExitCode.BAD_INPUT

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert run(["--version"]) == ExitCode.OK
        assert capsys.readouterr().out.startswith("drds ")


class TestCheck:
    def test_oracles_pass(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert run(["check"]) == ExitCode.OK

        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.count("PASS") == len(ORACLES)

    def test_failed_oracle_exit_code(
        self, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
    ) -> None:
        monkeypatch.setitem(
            ORACLES,
            "cvar_coefficient",
            lambda: OracleResult("cvar_coefficient", False, 1.0, 1e-9),
        )

        assert run(["check", "--oracle", "cvar_coefficient"]) == ExitCode.ORACLE_FAILURE
        assert "FAIL" in capsys.readouterr().out

    def test_scenario_validated_first(self, tmp_path: Path) -> None:
        path = _make_scenario(tmp_path, _SCALAR.replace("R: 1.0", "R: 0.0"))

        assert run(["check", str(path)]) == ExitCode.BAD_INPUT


class TestErrors:
    def test_invalid_scenario(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        path = _make_scenario(tmp_path, _SCALAR.replace("gamma: 0.1", "gamma: 1.5"))

        assert run(["solve", str(path), "--out", str(tmp_path)]) == ExitCode.BAD_INPUT
        assert "constraints[0].gamma" in capsys.readouterr().err

    def test_malformed_yaml(self, tmp_path: Path) -> None:
        path = _make_scenario(tmp_path, "model: [1, 2\n")

        assert run(["solve", str(path)]) == ExitCode.BAD_INPUT

    def test_missing_scenario_file(self, tmp_path: Path) -> None:
        assert run(["solve", str(tmp_path / "absent.scenario")]) == ExitCode.FAILURE

    def test_unreachable_target(self, tmp_path: Path) -> None:
        path = _make_scenario(tmp_path, _SCALAR.replace("Sigma_f: 1.0", "Sigma_f: 1.0e-4"))

        assert run(["solve", str(path), "--out", str(tmp_path)]) == ExitCode.FAILURE
        assert not (tmp_path / "policy.yaml").exists()

    def test_simulate_without_policy(self, tmp_path: Path) -> None:
        path = _make_scenario(tmp_path)

        assert run(["simulate", str(path), "--out", str(tmp_path / "run")]) == ExitCode.FAILURE


class TestPipeline:
    def test_solve_simulate_report(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        scenario = str(_make_scenario(tmp_path))
        out = tmp_path / "run"

        assert run(["solve", scenario, "--out", str(out)]) == ExitCode.OK
        assert "status: optimal" in capsys.readouterr().out
        assert run(["simulate", scenario, "--out", str(out), "--noise", "maximal"]) == ExitCode.OK
        assert run(["report", scenario, "--out", str(out)]) == ExitCode.OK

        report = load_yaml_document(out / "run_report.yaml")
        assert report["status"] == "optimal"
        assert report["montecarlo"]["samples"] == 40
        assert report["montecarlo"]["noise_kind"] == "maximal"
        assert (out / "run_report.csv").read_text().startswith("step,mean_0,cov_eig_0")
        for name in ("trajectories.csv", "ellipses.csv", "splash.csv", "diagnostics.yaml"):
            assert (out / name).exists()

    def test_baseline_and_noise_dump(self, tmp_path: Path) -> None:
        scenario = str(_make_scenario(tmp_path))
        out = tmp_path / "run"
        noise = tmp_path / "w.npy"

        assert run(["solve", scenario, "--out", str(out), "--baseline"]) == ExitCode.OK
        assert (
            run(
                [
                    "simulate",
                    scenario,
                    "--out",
                    str(out),
                    "--noise",
                    "student-t",
                    "--dof",
                    "5",
                    "--samples",
                    "10",
                    "--save-noise",
                    str(noise),
                ]
            )
            == ExitCode.OK
        )

        diagnostics = load_yaml_document(out / "diagnostics.yaml")
        assert diagnostics["baseline"] is True
        assert noise.exists()

    def test_custom_noise_uses_worst_case(self, tmp_path: Path) -> None:
        scenario = str(_make_scenario(tmp_path))
        out = tmp_path / "run"

        assert run(["solve", scenario, "--out", str(out)]) == ExitCode.OK
        assert (
            run(["simulate", scenario, "--out", str(out), "--noise", "custom", "--samples", "5"])
            == ExitCode.OK
        )

        summary = load_yaml_document(out / "montecarlo.yaml")
        assert summary["noise_kind"] == "custom"

    def test_report_rejects_stale_artifacts(self, tmp_path: Path) -> None:
        scenario = _make_scenario(tmp_path)
        out = tmp_path / "run"
        assert run(["solve", str(scenario), "--out", str(out)]) == ExitCode.OK

        scenario.write_text(_SCALAR.replace("delta: 1.0", "delta: 2.0"))

        assert run(["report", str(scenario), "--out", str(out)]) == ExitCode.BAD_INPUT

    def test_report_without_artifacts(self, tmp_path: Path) -> None:
        scenario = str(_make_scenario(tmp_path))
        out = tmp_path / "empty"

        assert run(["report", scenario, "--out", str(out)]) == ExitCode.OK

        assert yaml.safe_load((out / "run_report.yaml").read_text())["status"] == "not_solved"
