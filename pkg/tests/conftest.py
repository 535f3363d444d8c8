import pytest

from app.config import settings
from app.schemas.cycles import BraytonSpec, CycleKind
from app.schemas.substances import CoupledPair, SpinHalf
from app.services.cycles import BraytonCycleSolver
from app.services.processes import PathIntegrator, ProcessBuilder
from app.services.substance import thermal_point


@pytest.fixture
def tol():
    return settings.default_tolerances()


@pytest.fixture
def builder(tol):
    return ProcessBuilder(tol)


@pytest.fixture
def integrator(tol, builder):
    return PathIntegrator(tol, builder)


@pytest.fixture
def solver(tol, builder, integrator):
    return BraytonCycleSolver(tol, builder, integrator)


@pytest.fixture
def xx_point():
    """XX pair at B = 1, J = 0.5, kT = 0.5."""
    return thermal_point(CoupledPair(B=1.0, J=0.5), 2.0)


@pytest.fixture
def fixed_fx_spec(xx_point):
    return BraytonSpec(
        kind=CycleKind.FIXED_FX, anchor=xx_point, r=3.0, phi=0.25
    )


@pytest.fixture
def fixed_fy_spec():
    return BraytonSpec(
        kind=CycleKind.FIXED_FY,
        anchor=thermal_point(CoupledPair(B=1.0, J=2.0), 2.0),
        r=3.0,
        phi=0.25,
    )


@pytest.fixture
def single_spin_spec():
    return BraytonSpec(
        kind=CycleKind.SINGLE_SPIN,
        anchor=thermal_point(SpinHalf(B=1.0 / 3.0), 6.0),
        r=3.0,
        phi=0.25,
    )
