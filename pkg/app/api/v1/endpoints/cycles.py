"""
Cycle evaluation API endpoints.

Mirrors the CLI commands: one cycle's report or corners, J/B sweeps and
the isothermal heat-direction analysis. Errors propagate to the handlers
registered in app.main.
"""

from fastapi import APIRouter, Query, status

from app.config import settings
from app.schemas.cycles import CornerSet, CycleReport, SweepRow
from app.schemas.processes import IsothermalDirections
from app.schemas.requests import (
    CycleRequest,
    IsothermalRequest,
    SweepRequest,
)
from app.services.cycles import brayton_solver, build_spec
from app.services.isothermal import isothermal_analyzer
from app.services.sweeps import build_sweep_spec, sweep_runner

logger = settings.get_logger(__name__)
router = APIRouter()


@router.post(
    "/cycles/report",
    response_model=CycleReport,
    status_code=status.HTTP_200_OK,
)
def cycle_report(
    request: CycleRequest,
    oracle: bool = Query(
        default=False,
        description="Integrate the stage paths instead of closed forms",
    ),
) -> CycleReport:
    """
    ## Heats, work and efficiencies of one Brayton cycle
    """
    _, report = brayton_solver.evaluate(build_spec(request), oracle=oracle)
    logger.info(
        "Evaluated %s cycle (oracle=%s): eta=%.6g",
        request.kind.value, oracle, report.eta,
    )
    return report


@router.post(
    "/cycles/corners",
    response_model=CornerSet,
    status_code=status.HTTP_200_OK,
)
def cycle_corners(request: CycleRequest) -> CornerSet:
    """
    ## Corners A, B, C, D of one Brayton cycle
    """
    return brayton_solver.solve_corners(build_spec(request))


@router.post(
    "/cycles/sweep",
    response_model=list[SweepRow],
    status_code=status.HTTP_200_OK,
)
def cycle_sweep(request: SweepRequest) -> list[SweepRow]:
    """
    ## J/B sweep; infeasible points come back flagged, not dropped
    """
    return sweep_runner.run(build_sweep_spec(request))


@router.post(
    "/isothermal",
    response_model=IsothermalDirections,
    status_code=status.HTTP_200_OK,
)
def isothermal(request: IsothermalRequest) -> IsothermalDirections:
    """
    ## Heat directions of a small isothermal bump at B = J
    """
    return isothermal_analyzer.isothermal_heat_directions(
        request.B,
        request.J,
        request.anchor_beta,
        request.bump,
        request.step,
    )
