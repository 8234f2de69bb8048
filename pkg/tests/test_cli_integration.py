"""
Integration tests for the command-line interface.

Every command writes a fresh run directory with a manifest and prints a JSON
summary on stdout; failures print one JSON error payload on stderr and exit
with 1 (run failure) or 2 (usage).
"""
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from app.cli import build_run_config, cli
from app.core.exceptions import FileProcessingError, ValidationError
from app.services.experiment_service import ExperimentService

SYMMETRIC = ["--model", "symmetric", "--n", "2000", "--mu", "2", "--b", "4",
             "--alpha", "0.4", "--epsilon", "0.1"]


@pytest.fixture
def runner(monkeypatch, tmp_path):
    monkeypatch.setenv("EXITSBM_OUTPUT_ROOT", str(tmp_path / "runs"))
    monkeypatch.setenv("EXITSBM_LOG_LEVEL", "WARNING")
    monkeypatch.delenv("EXITSBM_THREADS", raising=False)
    return CliRunner()


def invoke(runner, args):
    return runner.invoke(cli, args, prog_name="exitsbm")


def summary(result) -> dict:
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


def error_payload(result) -> dict:
    for line in reversed(result.stderr.strip().splitlines()):
        try:
            parsed = json.loads(line)
        except json.JSONDecodeError:
            continue
        if "exit_code" in parsed:
            return parsed
    raise AssertionError(f"no error payload in {result.stderr!r}")


class TestGenerateAndBp:
    """
    **Feature: exitsbm, Property 35: Commands write their artifacts and a manifest**
    """

    @pytest.mark.integration
    def test_generate_writes_inputs(self, runner, tmp_path):
        out = summary(invoke(runner, ["generate", *SYMMETRIC, "--seed", "3"]))
        run_dir = Path(out["run_dir"])
        assert run_dir.parent == tmp_path / "runs"
        assert run_dir.name == out["run_id"]
        for name in ("graph.txt", "labels.csv", "side_info.csv", "channel.json", "manifest.json"):
            assert (run_dir / name).exists()
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["command"] == "generate"
        assert manifest["seed"] == 3
        assert manifest["params"]["a"] == pytest.approx(8.0)
        assert manifest["files"][-1] == "manifest.json"
        assert manifest["metrics"]["stage_count"] == 2

    @pytest.mark.integration
    def test_generate_is_repeatable_for_a_seed(self, runner):
        first = Path(summary(invoke(runner, ["generate", *SYMMETRIC, "--seed", "5"]))["run_dir"])
        second = Path(summary(invoke(runner, ["generate", *SYMMETRIC, "--seed", "5"]))["run_dir"])
        assert first != second
        for name in ("graph.txt", "labels.csv", "side_info.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    @pytest.mark.integration
    def test_bp_on_generated_inputs(self, runner):
        generated = summary(invoke(runner, ["generate", *SYMMETRIC, "--seed", "3"]))
        out = summary(invoke(runner, ["bp", *SYMMETRIC, "--seed", "3", "--iters", "2",
                                      "--input-dir", generated["run_dir"]]))
        report = out["report"]
        assert report["t"] == 2 and report["n"] == 2000
        assert 0.0 <= report["misclassification_rate"] <= 1.0
        assert report["misclassification_rate_flip_min"] <= 0.5
        assert 0.0 < report["predicted_error"] < 0.5
        run_dir = Path(out["run_dir"])
        assert not (run_dir / "graph.txt").exists()
        beliefs = (run_dir / "beliefs.csv").read_text().splitlines()
        assert beliefs[0] == "node_id,belief" and len(beliefs) == 2001

    @pytest.mark.integration
    def test_bp_single_model(self, runner):
        out = summary(invoke(runner, ["bp", "--model", "single", "--n", "2000", "--k-frac", "0.1",
                                      "--p", "0.03", "--q", "0.005", "--alpha", "0.4", "--iters", "2"]))
        report = out["report"]
        assert report["community_error"]["symmetric_difference_ratio"] >= 0.0
        assert report["predicted_type_ii"] is not None
        files = json.loads(Path(out["manifest"]).read_text())["files"]
        assert {"graph.txt", "beliefs.csv", "estimates.csv", "estimates_map.csv", "report.json"} <= set(files)

    @pytest.mark.integration
    def test_bp_rejects_zero_iterations(self, runner):
        result = invoke(runner, ["bp", *SYMMETRIC, "--iters", "0"])
        assert result.exit_code == 2
        assert error_payload(result)["error_type"] == "ValidationError"


class TestAnalysisCommands:
    @pytest.mark.integration
    def test_de_symmetric(self, runner):
        out = summary(invoke(runner, ["de", "--mu", "6", "--alpha", "0.4", "--epsilon", "0.1"]))
        report = out["report"]
        assert report["converged"]
        assert 8.0 < report["fixed_point"] < 9.0
        trace = (Path(out["run_dir"]) / "de_trace.csv").read_text().splitlines()
        assert trace[0] == "t,state,predicted_error"
        assert len(trace) == report["iterations"] + 2

    @pytest.mark.integration
    def test_de_single_with_config_file(self, runner, tmp_path):
        config_file = tmp_path / "run.json"
        config_file.write_text(json.dumps({"model": "single", "k_frac": 0.1, "lambda": 0.1, "alpha": 0.4}))
        out = summary(invoke(runner, ["de", "--config", str(config_file), "--lambda", "2.0"]))
        assert out["report"]["params"]["lambda"] == 2.0
        assert out["report"]["params"]["k_frac"] == 0.1

    @pytest.mark.integration
    def test_exit_curve_family(self, runner):
        out = summary(invoke(runner, ["exit", "--mu", "2", "--alpha", "0.1", "--grid", "32",
                                      "--vary", "epsilon=0.1,1"]))
        curves = out["report"]["curves"]
        assert [c["params"]["epsilon"] for c in curves] == [0.1, 1.0]
        run_dir = Path(out["run_dir"])
        for curve in curves:
            rows = (run_dir / curve["csv"]).read_text().splitlines()
            assert rows[0] == "i_in,i_out" and len(rows) == 33
            assert (run_dir / curve["summary"]).exists()
            assert curve["operating_point"] is not None
        assert curves[0]["csv"] == "curve_mu=2_alpha=0.1_epsilon=0.1.csv"
        assert curves[0]["j_fit_max_residual"] is None

    @pytest.mark.integration
    def test_exit_with_fitted_j(self, runner):
        out = summary(invoke(runner, ["exit", "--mu", "6", "--alpha", "0.4", "--epsilon", "0",
                                      "--grid", "16", "--fit-j"]))
        (curve,) = out["report"]["curves"]
        assert curve["j_fit_max_residual"] <= 1e-2
        assert curve["j_fit_rank_deficient"] is False
        assert curve["operating_point"] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.integration
    def test_scan_without_transition(self, runner):
        out = summary(invoke(runner, ["scan", "--scan-param", "mu", "--range", "5:6",
                                      "--alpha", "0.1", "--epsilon", "1"]))
        assert out["report"]["transition"] is False
        run_dir = Path(out["run_dir"])
        assert json.loads((run_dir / "scan.json").read_text())["critical_value"] is None
        rows = (run_dir / "scan_points.csv").read_text().splitlines()
        assert rows[0] == "value,i_operating,nu_operating,escaped,de_iterations"
        assert len(rows) == 3

    @pytest.mark.integration
    def test_scan_needs_a_range(self, runner):
        result = invoke(runner, ["scan", "--scan-param", "mu", "--alpha", "0.1"])
        assert result.exit_code == 2


class TestFailures:
    """
    **Feature: exitsbm, Property 36: Invalid input exits 2 and failed runs exit 1**
    """

    @pytest.mark.integration
    def test_alpha_out_of_range(self, runner):
        result = invoke(runner, ["de", "--mu", "2", "--alpha", "0.6"])
        assert result.exit_code == 2
        payload = error_payload(result)
        assert payload["error_type"] == "ValidationError"
        assert any(entry.startswith("alpha") for entry in payload["details"]["errors"])

    @pytest.mark.integration
    def test_unknown_flag_is_usage_error(self, runner):
        assert invoke(runner, ["de", "--bogus", "1"]).exit_code == 2

    @pytest.mark.integration
    def test_missing_config_file(self, runner, tmp_path):
        result = invoke(runner, ["de", "--config", str(tmp_path / "absent.json")])
        assert result.exit_code == 1
        assert error_payload(result)["error_type"] == "FileProcessingError"

    @pytest.mark.integration
    def test_bad_environment_configuration(self, runner, monkeypatch):
        monkeypatch.setenv("EXITSBM_QUADRATURE_NODES", "63")
        result = invoke(runner, ["de", "--mu", "2", "--alpha", "0.4"])
        assert result.exit_code == 2
        assert error_payload(result)["error_type"] == "ConfigurationError"

    @pytest.mark.integration
    def test_injected_fault_fails_the_suite(self, runner):
        result = invoke(runner, ["validate", "--quick", "--inject-fault", "f_sign"])
        assert result.exit_code == 1
        payload = error_payload(result)
        assert payload["error_type"] == "SuiteFailure"
        assert any(name.startswith("f_message") for name in payload["details"]["failed_checks"])

    @pytest.mark.integration
    def test_unknown_fault(self, runner):
        assert invoke(runner, ["validate", "--quick", "--inject-fault", "nope"]).exit_code == 2

    @pytest.mark.integration
    def test_unexpected_error_is_internal(self, runner, mocker):
        mocker.patch.object(ExperimentService, "generate", side_effect=RuntimeError("boom"))
        result = invoke(runner, ["generate"] + SYMMETRIC)
        assert result.exit_code == 1
        payload = error_payload(result)
        assert payload["error_type"] == "InternalError"
        assert payload["details"] == {"type": "RuntimeError", "reason": "boom"}


class TestValidateCommand:
    @pytest.mark.integration
    def test_quick_suite_passes(self, runner):
        out = summary(invoke(runner, ["validate", "--quick", "--seed", "1"]))
        report = out["report"]
        assert report["passed"] and report["quick"]
        names = {check["name"] for check in report["checks"]}
        assert {"f_message.reference", "exit.j_side_information", "bp.tree_oracle_symmetric",
                "graphgen.degree_distribution", "devo.smallest_fixed_point",
                "numerics.quadrature_doubling_single", "exit.start_point_gap_alpha_0.4"} <= names
        assert (Path(out["run_dir"]) / "validation.json").exists()


class TestBuildRunConfig:
    @pytest.mark.unit
    def test_flags_override_file(self, tmp_path):
        config_file = tmp_path / "run.json"
        config_file.write_text(json.dumps({"mu": 1.0, "alpha": 0.2, "scan_range": "0.5:1.5"}))
        cfg = build_run_config({"config_file": config_file, "mu": 3.0, "alpha": None, "quick": False})
        assert cfg.mu == 3.0
        assert cfg.alpha == 0.2
        assert cfg.scan_range == (0.5, 1.5)

    @pytest.mark.unit
    def test_bad_config_files(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{")
        with pytest.raises(ValidationError):
            build_run_config({"config_file": broken})
        listed = tmp_path / "list.json"
        listed.write_text("[1, 2]")
        with pytest.raises(ValidationError):
            build_run_config({"config_file": listed})
        with pytest.raises(FileProcessingError):
            build_run_config({"config_file": tmp_path / "absent.json"})
