import pytest

from app.exceptions import NoConvergence
from app.schemas.cycles import CycleKind
from app.schemas.substances import PairModel
from app.schemas.verification import CheckResult
from app.services.verification import InvariantSuite


@pytest.fixture(scope="module")
def suite():
    return InvariantSuite()


@pytest.mark.parametrize(
    "check",
    [
        "check_identities",
        "check_force_oracle",
        "check_adiabats",
        "check_uncoupled_limit",
        "check_isothermal",
        "check_general_xy",
    ],
)
def test_fast_checks_pass(suite, check):
    result = getattr(suite, check)()
    assert result.passed, result


@pytest.mark.slow
@pytest.mark.parametrize(
    "check",
    [
        "check_closure",
        "check_cycle_equivalence",
        "check_coupling_enhancement",
        "check_refrigerator",
    ],
)
def test_slow_checks_pass(suite, check):
    result = getattr(suite, check)()
    assert result.passed, result


def test_check_names_are_unique(suite):
    names = [name for name, _ in suite.checks()]
    assert len(names) == len(set(names)) == 10


def test_failing_check_fails_the_summary(monkeypatch):
    def broken():
        raise NoConvergence("quadrature did not settle", iterations=3)

    def fine():
        return CheckResult(name="fine", passed=True)

    suite = InvariantSuite()
    monkeypatch.setattr(
        suite, "checks", lambda: [("broken", broken), ("fine", fine)]
    )
    summary = suite.run_suite()
    assert not summary.passed
    assert summary.failed == 1
    assert summary.checks[0].name == "broken"
    assert "did not settle" in summary.checks[0].detail
    assert summary.checks[1].passed


@pytest.mark.slow
def test_equivalence_reports_fieldwise_deviation(monkeypatch, fixed_fy_spec):
    suite = InvariantSuite()
    corners = suite.solver.solve_corners(fixed_fy_spec)
    monkeypatch.setattr(
        suite, "_sample_cycles", lambda: [(fixed_fy_spec, corners)]
    )
    result = suite.check_cycle_equivalence()
    assert result.passed, result
    assert "1 cycles" in result.detail
    assert "fieldwise relative deviation" in result.detail


def test_samples_include_an_anisotropic_cycle():
    models = {
        spec.anchor.substance.model
        for spec in InvariantSuite.sample_specs()
        if spec.kind is not CycleKind.SINGLE_SPIN
    }
    assert PairModel.GENERAL_XY in models
