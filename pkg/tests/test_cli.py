import json

import pytest

from app import cli
from app.config import settings
from app.schemas.cycles import CSV_COLUMNS
from app.schemas.verification import CheckResult, VerificationSummary
from app.services.verification import InvariantSuite


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_eval_json(capsys):
    code, out = run_cli(capsys, "eval", "--kT", "0.5")
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report["kind"] == "fixed-fx"
    assert report["eta"] == pytest.approx(0.5, abs=1e-10)


def test_eval_csv_is_one_row(capsys):
    code, out = run_cli(
        capsys, "eval", "--kind", "single-spin", "--format", "csv"
    )
    assert code == cli.EXIT_OK
    header, row = out.splitlines()
    assert header.split(",")[0] == "kind"
    assert row.startswith("single-spin,")


def test_eval_is_deterministic(capsys):
    _, first = run_cli(capsys, "eval", "--J", "0.8", "--beta", "1.5")
    _, second = run_cli(capsys, "eval", "--J", "0.8", "--beta", "1.5")
    assert first == second


def test_invalid_pressure_ratio(capsys):
    code, out = run_cli(capsys, "eval", "--phi", "1.5")
    assert code == cli.EXIT_INVALID
    assert out == ""


def test_temperature_given_twice(capsys):
    code, _ = run_cli(capsys, "eval", "--beta", "2", "--kT", "0.5")
    assert code == cli.EXIT_INVALID


def test_malformed_sweep_range(capsys):
    code, _ = run_cli(capsys, "sweep", "--vary-j", "0:2")
    assert code == cli.EXIT_INVALID


def test_unknown_command(capsys):
    code, _ = run_cli(capsys, "optimize")
    assert code == cli.EXIT_INVALID


def test_numerical_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(settings, "CLOSURE_TOL", -1.0)
    code, out = run_cli(capsys, "eval")
    assert code == cli.EXIT_NUMERICAL
    assert out == ""


def test_failed_verification_exit_code(capsys, monkeypatch):
    summary = VerificationSummary(
        checks=[CheckResult(name="identities", passed=False, worst=1.0)],
        passed=False,
        failed=1,
    )
    monkeypatch.setattr(InvariantSuite, "run_suite", lambda self: summary)
    code, out = run_cli(capsys, "verify")
    assert code == cli.EXIT_VERIFY_FAILED
    assert json.loads(out)["failed"] == 1


@pytest.mark.slow
def test_verify_passes_on_default_settings(capsys):
    code, out = run_cli(capsys, "verify")
    summary = json.loads(out)
    failing = [c for c in summary["checks"] if not c["passed"]]
    assert failing == []
    assert code == cli.EXIT_OK


def test_config_file_is_overridden_by_flags(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps({"kind": "single-spin", "beta": 2.0, "phi": 0.25})
    )
    code, out = run_cli(
        capsys, "eval", "--config", str(config), "--phi", "0.5"
    )
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report["kind"] == "single-spin"
    assert report["eta"] == pytest.approx(1.0 - 0.5**0.5, abs=1e-10)


def test_config_file_errors(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{kind: ")
    code, _ = run_cli(capsys, "eval", "--config", str(broken))
    assert code == cli.EXIT_INVALID
    code, _ = run_cli(
        capsys, "eval", "--config", str(tmp_path / "missing.json")
    )
    assert code == cli.EXIT_INVALID
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"temperature": 0.5}))
    code, _ = run_cli(capsys, "eval", "--config", str(unknown))
    assert code == cli.EXIT_INVALID


def test_isothermal_coupling_bump(capsys):
    code, out = run_cli(capsys, "isothermal", "--bump", "dJ")
    assert code == cli.EXIT_OK
    result = json.loads(out)
    assert result["total_heat_sign"] == "release"
    assert result["local_heat_sign"] == "absorb"


def test_corners_have_no_csv_form(capsys):
    code, out = run_cli(capsys, "corners", "--format", "csv")
    assert code == cli.EXIT_INVALID
    assert out == ""


def test_output_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out = run_cli(capsys, "eval", "--output", str(target))
    assert code == cli.EXIT_OK
    assert out == ""
    assert json.loads(target.read_text())["eta"] == pytest.approx(
        0.5, abs=1e-10
    )


@pytest.mark.slow
def test_sweep_csv(capsys):
    code, out = run_cli(
        capsys, "sweep", "--vary-j", "0:1:3", "--format", "csv"
    )
    assert code == cli.EXIT_OK
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 4
    assert lines[1].startswith("0,")
