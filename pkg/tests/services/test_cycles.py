import math

import pytest
from pydantic import ValidationError

from app.config import settings
from app.exceptions import BracketError, NonClosure
from app.schemas.cycles import BraytonSpec, CycleKind, SweepHold
from app.schemas.requests import CycleRequest
from app.schemas.substances import CoupledPair, PairModel, SpinHalf
from app.services.cycles import build_spec
from app.services.substance import generalized_force, thermal_point


def _spec(kind, substance, beta=2.0, r=3.0, phi=0.25):
    return BraytonSpec(
        kind=kind, anchor=thermal_point(substance, beta), r=r, phi=phi
    )


def test_fixed_fx_corners(solver, fixed_fx_spec):
    corners = solver.solve_corners(fixed_fx_spec)
    assert corners.lam == pytest.approx(2.0, rel=1e-15)
    assert corners.B.substance.X == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert corners.C.substance.X == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert corners.D.substance.X == pytest.approx(2.0, rel=1e-14)
    assert corners.C.substance.J == pytest.approx(0.25, rel=1e-15)
    assert corners.D.substance.J == pytest.approx(0.25, rel=1e-15)
    assert corners.D.beta == pytest.approx(4.0, rel=1e-9)
    assert corners.closure_residual <= settings.CLOSURE_TOL
    assert list(corners.corners()) == ["A", "B", "C", "D"]


def test_single_spin_corners(solver, single_spin_spec):
    corners = solver.solve_corners(single_spin_spec)
    lengths = [tp.substance.L for tp in corners.corners().values()]
    assert lengths == pytest.approx([3.0, 1.0, 2.0, 6.0], rel=1e-14)


def test_fixed_fy_corners(solver, fixed_fy_spec):
    corners = solver.solve_corners(fixed_fy_spec)
    assert corners.B.substance.Y == pytest.approx(1.0 / 6.0, rel=1e-14)
    assert corners.C.substance.Y == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert corners.D.substance.Y == pytest.approx(1.0, rel=1e-14)
    assert corners.B.substance.B == 1.0
    assert corners.C.substance.B == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize(
    "spec_fixture", ["fixed_fx_spec", "fixed_fy_spec", "single_spin_spec"]
)
def test_efficiency_depends_only_on_pressure_ratio(
    request, solver, spec_fixture
):
    spec = request.getfixturevalue(spec_fixture)
    corners, report = solver.evaluate(spec)
    assert report.eta == pytest.approx(0.5, abs=1e-10)
    assert report.w_net == pytest.approx(
        report.q_in - report.q_out, abs=1e-14
    )
    assert report.q_in > 0.0
    for value in solver.ratio_chain(corners).values():
        assert value == pytest.approx(0.25, abs=1e-9)


def test_efficiency_for_other_pressure_ratio(solver):
    spec = _spec(
        CycleKind.FIXED_FX, CoupledPair(B=1.5, J=0.8), beta=1.2, r=2.0,
        phi=0.5,
    )
    _, report = solver.evaluate(spec)
    assert report.eta == pytest.approx(1.0 - math.sqrt(0.5), abs=1e-10)


def test_ratio_chain_names(solver, fixed_fx_spec, fixed_fy_spec):
    fx = solver.ratio_chain(solver.solve_corners(fixed_fx_spec))
    assert set(fx) == {
        "X_A^2/X_D^2",
        "X_B^2/X_C^2",
        "F_x0/F_x1",
        "Y_1^2/Y_0^2",
        "F_yC/F_yB",
        "F_yD/F_yA",
    }
    fy = solver.ratio_chain(solver.solve_corners(fixed_fy_spec))
    assert "Y_A^2/Y_D^2" in fy
    assert "F_xD/F_xA" in fy


def test_uncoupled_pair_has_no_ratio_for_y(solver):
    spec = _spec(CycleKind.FIXED_FX, CoupledPair(B=1.0, J=0.0))
    chain = solver.ratio_chain(solver.solve_corners(spec))
    assert set(chain) == {"X_A^2/X_D^2", "X_B^2/X_C^2", "F_x0/F_x1"}


def test_pressure_ratio_one_gives_no_work(solver, xx_point):
    spec = BraytonSpec(
        kind=CycleKind.FIXED_FX, anchor=xx_point, r=3.0, phi=1.0
    )
    corners, report = solver.evaluate(spec)
    assert corners.D.beta == pytest.approx(2.0, rel=1e-9)
    assert report.eta == pytest.approx(0.0, abs=1e-9)
    assert report.w_net == pytest.approx(0.0, abs=1e-9)


def test_single_spin_is_its_own_subsystem(solver, single_spin_spec):
    _, report = solver.evaluate(single_spin_spec)
    assert report.q1_loc == report.q_in
    assert report.q2_loc == -report.q_out
    assert report.w_loc == pytest.approx(report.w_net, abs=1e-14)
    assert report.eta_loc == pytest.approx(report.eta, abs=1e-14)
    assert report.w_ratio is None
    assert report.coupling_work is None
    assert report.refrigerator is False


def test_fixed_fx_work_decomposition(solver, fixed_fx_spec):
    _, report = solver.evaluate(fixed_fx_spec)
    assert report.w_net - 2.0 * report.w_loc == pytest.approx(
        report.coupling_work, abs=1e-12
    )
    assert report.coupling_work >= 0.0
    assert report.w_ratio == pytest.approx(
        report.w_net / (2.0 * report.w_loc), rel=1e-15
    )
    # The local cycle is a Brayton cycle at half the force
    assert report.eta_loc == pytest.approx(0.5, abs=1e-10)


def test_uncoupled_limit(solver):
    exact = solver.evaluate(
        _spec(CycleKind.FIXED_FX, CoupledPair(B=1.0, J=0.0))
    )
    assert exact[1].w_ratio == pytest.approx(1.0, abs=1e-12)
    assert exact[1].coupling_work == pytest.approx(0.0, abs=1e-15)
    weak = solver.evaluate(
        _spec(CycleKind.FIXED_FX, CoupledPair(B=1.0, J=1e-6))
    )
    assert abs(weak[1].w_ratio - 1.0) <= 1e-3


def test_fixed_fy_local_otto_cycle(solver, fixed_fy_spec):
    corners, report = solver.evaluate(fixed_fy_spec)
    assert report.coupling_work is None
    assert report.refrigerator == (report.p_e_b < report.p_e_a)
    # Local levels stay fixed on each isobar, so W_loc = q1 + q2
    assert report.w_loc == pytest.approx(
        report.q1_loc + report.q2_loc, abs=1e-15
    )
    assert report.q1_loc == pytest.approx(
        (report.p_e_b - report.p_e_a) * corners.A.substance.B, abs=1e-15
    )


def test_fixed_fy_refrigerator_regime(solver):
    _, report = solver.evaluate(
        _spec(CycleKind.FIXED_FY, CoupledPair(B=1.0, J=4.0))
    )
    assert report.refrigerator is True
    assert report.q1_loc < 0.0
    assert report.q2_loc > 0.0
    assert report.w_loc < 0.0
    assert report.eta_loc is None
    assert report.w_net > 0.0


def test_spec_validation(xx_point):
    with pytest.raises(ValidationError):
        BraytonSpec(kind=CycleKind.FIXED_FX, anchor=xx_point, r=1.0, phi=0.5)
    with pytest.raises(ValidationError):
        BraytonSpec(kind=CycleKind.FIXED_FX, anchor=xx_point, r=3.0, phi=1.5)
    with pytest.raises(ValidationError):
        BraytonSpec(kind=CycleKind.FIXED_FX, anchor=xx_point, r=3.0, phi=0.0)
    with pytest.raises(ValidationError):
        BraytonSpec(
            kind=CycleKind.SINGLE_SPIN, anchor=xx_point, r=3.0, phi=0.25
        )
    with pytest.raises(ValidationError):
        _spec(CycleKind.FIXED_FX, SpinHalf(B=1.0))
    with pytest.raises(ValidationError):
        _spec(CycleKind.FIXED_FY, CoupledPair(B=1.0, J=0.0))


def test_build_spec_from_request():
    spec = build_spec(CycleRequest(kind=CycleKind.SINGLE_SPIN, B=2.0, kT=0.5))
    assert isinstance(spec.anchor.substance, SpinHalf)
    assert spec.anchor.beta == 2.0
    spec = build_spec(CycleRequest())
    assert spec.anchor.substance == CoupledPair(B=1.0, J=0.5)
    assert spec.anchor.beta == 2.0
    with pytest.raises(ValidationError):
        CycleRequest(beta=2.0, kT=0.5)


def test_closure_failure(monkeypatch, solver, fixed_fx_spec):
    monkeypatch.setattr(settings, "CLOSURE_TOL", -1.0)
    with pytest.raises(NonClosure) as excinfo:
        solver.solve_corners(fixed_fx_spec)
    assert excinfo.value.residual >= 0.0
    assert excinfo.value.parameters["kind"] == "fixed-fx"


def test_anchored_spec_holds(solver, fixed_fx_spec):
    warm = solver.anchored_spec(fixed_fx_spec, 1.5)
    assert warm.anchor.beta == 2.0
    assert warm.anchor.substance.J == 1.5

    F_high = generalized_force(fixed_fx_spec.anchor.substance, 2.0)
    held = solver.anchored_spec(fixed_fx_spec, 0.8, SweepHold.ANCHOR_FORCE)
    assert generalized_force(
        held.anchor.substance, held.anchor.beta
    ) == pytest.approx(F_high, rel=1e-10)


@pytest.mark.slow
@pytest.mark.parametrize(
    "spec_fixture", ["fixed_fx_spec", "fixed_fy_spec", "single_spin_spec"]
)
def test_quadrature_report_matches_closed_forms(
    request, solver, spec_fixture
):
    spec = request.getfixturevalue(spec_fixture)
    corners = solver.solve_corners(spec)
    closed = solver.brayton_report(corners, spec)
    oracle = solver.oracle_report(corners, spec)
    for field in ("q_in", "q_out", "w_net", "w_loc", "q1_loc", "q2_loc"):
        assert getattr(oracle, field) == pytest.approx(
            getattr(closed, field), rel=1e-7, abs=1e-12
        )
    assert oracle.refrigerator == closed.refrigerator


@pytest.mark.slow
def test_anisotropic_quadrature_report_matches_closed_forms(solver):
    pair = CoupledPair(
        B=1.0, J=2.0, model=PairModel.GENERAL_XY, gamma=0.3, delta=0.2
    )
    spec = _spec(CycleKind.FIXED_FY, pair)
    corners = solver.solve_corners(spec)
    closed = solver.brayton_report(corners, spec)
    oracle = solver.oracle_report(corners, spec)
    for field in ("q_in", "q_out", "w_net", "w_loc", "q1_loc", "q2_loc"):
        assert getattr(oracle, field) == pytest.approx(
            getattr(closed, field), rel=1e-7, abs=1e-9
        )
    assert oracle.refrigerator == closed.refrigerator
    assert closed.eta == pytest.approx(0.5, abs=1e-10)


@pytest.mark.slow
def test_refrigerator_threshold(solver):
    template = _spec(CycleKind.FIXED_FY, CoupledPair(B=1.0, J=1.0))
    threshold = solver.locate_refrigerator_threshold(
        template, 0.05, 5.0, n_scan=11
    )
    assert 3.0 < threshold < 3.5
    spec = solver.anchored_spec(template, threshold)
    _, report = solver.evaluate(spec)
    assert abs(report.w_loc) <= 1e-5


@pytest.mark.slow
def test_refrigerator_threshold_outside_range(solver):
    template = _spec(CycleKind.FIXED_FY, CoupledPair(B=1.0, J=1.0))
    with pytest.raises(BracketError):
        solver.locate_refrigerator_threshold(template, 0.5, 2.0, n_scan=4)
