"""
Low-temperature isothermal bumps of a coupled pair at B = J.

At B = J the two lowest pair levels are degenerate, so any small change of
B or J lowers the entropy and the pair releases heat. One spin of the pair
can still absorb heat: raising J favours the entangled singlet-like state,
pushing the spin's excited population up.
"""

from typing import Optional

from app.config import settings
from app.exceptions import DomainError
from app.schemas.processes import (
    BumpKind,
    HeatDirection,
    IsothermalDirections,
    PathVariable,
)
from app.schemas.substances import CoupledPair, Tolerances
from app.services.numerics import central_diff
from app.services.processes import PathIntegrator, ProcessBuilder
from app.services.substance import entropy, excited_population, thermal_point

logger = settings.get_logger(__name__)

# Both ground levels each hold half the population, one spin is a quarter
# excited
GROUND_MANIFOLD_P_E = 0.25
P_E_TOLERANCE = 1e-2
DEGENERACY_TOLERANCE = 1e-12
# Samples of the short isotherm carrying the local heat
BUMP_SAMPLES = 33


def _direction(heat: float) -> HeatDirection:
    if heat > 0.0:
        return HeatDirection.ABSORB
    if heat < 0.0:
        return HeatDirection.RELEASE
    return HeatDirection.NONE


def _pair_entropy(B: float, J: float, beta: float) -> float:
    return entropy(thermal_point(CoupledPair(B=B, J=J), beta))


class IsothermalAnalyzer:
    """Entropy slopes and heat directions of small isothermal steps."""

    def __init__(
        self,
        tol: Optional[Tolerances] = None,
        integrator: Optional[PathIntegrator] = None,
    ):
        self.tol = tol or settings.default_tolerances()
        self.integrator = integrator or PathIntegrator(self.tol)
        self.builder: ProcessBuilder = self.integrator.builder
        self.logger = logger

    def entropy_partials(
        self, B: float, J: float, beta: float
    ) -> tuple[float, float]:
        """(dS/dB, dS/dJ) of the XX pair by central differences."""
        for name, value in (("B", B), ("J", J), ("beta", beta)):
            if not value > 0.0:
                raise DomainError(
                    f"{name} must be positive, got {value}",
                    quantity=name,
                    value=value,
                )
        dS_dB = central_diff(lambda b: _pair_entropy(b, J, beta), B, self.tol)
        dS_dJ = central_diff(lambda j: _pair_entropy(B, j, beta), J, self.tol)
        return dS_dB, dS_dJ

    def isothermal_heat_directions(
        self,
        B: float,
        J: float,
        beta: float,
        bump: BumpKind,
        step: float,
    ) -> IsothermalDirections:
        """Signs of the pair's heat T dS and one spin's local heat.

        Raises:
            DomainError: B != J, or beta is too small for the pair to sit in
                its ground manifold.
        """
        bump = BumpKind(bump)
        if not (B > 0.0 and J > 0.0 and beta > 0.0 and step > 0.0):
            raise DomainError(
                "B, J, beta and step must be positive",
                quantity="parameters",
            )
        if abs(B - J) > DEGENERACY_TOLERANCE:
            raise DomainError(
                f"Isothermal directions need B = J, got B={B}, J={J}",
                quantity="J",
                value=J,
            )

        start = thermal_point(CoupledPair(B=B, J=J), beta)
        p_e_start = excited_population(start.substance, start.probs)
        if abs(p_e_start - GROUND_MANIFOLD_P_E) > P_E_TOLERANCE:
            raise DomainError(
                f"Temperature too high: one spin is {p_e_start:.4f} "
                f"excited at beta={beta}, expected about "
                f"{GROUND_MANIFOLD_P_E}",
                quantity="beta",
                value=beta,
            )

        if bump is BumpKind.DB:
            variable, end = PathVariable.B, B + step
        else:
            variable, end = PathVariable.J, J + step
        path = self.builder.build_isotherm(start, variable, end, BUMP_SAMPLES)

        total_heat = (entropy(path.end) - entropy(start)) / beta
        local_heat = self.integrator.local_heat_along(path)
        p_e_end = excited_population(path.end.substance, path.end.probs)

        self.logger.debug(
            "Isothermal %s bump at B=J=%.6g, beta=%.6g: Q=%.3g, Q_loc=%.3g",
            bump.value, B, beta, total_heat, local_heat,
        )
        return IsothermalDirections(
            bump=bump,
            step=step,
            total_heat=total_heat,
            local_heat=local_heat,
            total_heat_sign=_direction(total_heat),
            local_heat_sign=_direction(local_heat),
            p_e_start=p_e_start,
            p_e_end=p_e_end,
        )


isothermal_analyzer = IsothermalAnalyzer()
