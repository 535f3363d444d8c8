"""
Request and run-configuration schemas shared by the CLI and the HTTP API.
"""

from enum import Enum
from typing import Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.cycles import CycleKind, SweepHold
from app.schemas.processes import BumpKind
from app.schemas.substances import PairModel, Tolerances

# Corner A at kT = 0.5 B; isothermal bumps need the ground manifold
DEFAULT_CYCLE_BETA = 2.0
DEFAULT_ISOTHERMAL_BETA = 20.0


def _anchor_beta(
    beta: Optional[float], kT: Optional[float], default: float
) -> float:
    if beta is not None:
        return beta
    if kT is not None:
        return 1.0 / kT
    return default


class TemperatureMixin(BaseModel):
    """Temperature given as beta or as kT (energy units), never both."""

    beta: Optional[float] = Field(default=None, gt=0.0)
    kT: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def check_temperature(self):
        if self.beta is not None and self.kT is not None:
            raise ValueError("give either beta or kT, not both")
        return self


class CycleRequest(TemperatureMixin):
    """A Brayton cycle: substance at corner A, kind and the two ratios."""

    model_config = ConfigDict(frozen=True)

    kind: CycleKind = CycleKind.FIXED_FX
    B: float = Field(default=1.0, gt=0.0)
    J: float = Field(default=0.5, ge=0.0)
    gamma: float = 0.0
    delta: float = 0.0
    model: PairModel = PairModel.XX
    r: float = Field(default=3.0, gt=1.0)
    phi: float = Field(default=0.25, gt=0.0, le=1.0)

    @property
    def anchor_beta(self) -> float:
        return _anchor_beta(self.beta, self.kT, DEFAULT_CYCLE_BETA)


class SweepRequest(CycleRequest):
    """A J/B sweep around a cycle template."""

    lo: float = Field(default=0.0, ge=0.0)
    hi: float = Field(default=2.0, ge=0.0)
    n: int = Field(default=41, ge=2)
    hold: SweepHold = SweepHold.ANCHOR_TEMPERATURE
    anchor_force: Optional[float] = Field(default=None, lt=0.0)


class IsothermalRequest(TemperatureMixin):
    """A small isothermal bump of B or J at B = J."""

    model_config = ConfigDict(frozen=True)

    B: float = Field(default=1.0, gt=0.0)
    J: float = Field(default=1.0, gt=0.0)
    bump: BumpKind = BumpKind.DB
    step: float = Field(default=0.01, gt=0.0)

    @property
    def anchor_beta(self) -> float:
        return _anchor_beta(self.beta, self.kT, DEFAULT_ISOTHERMAL_BETA)


class Command(str, Enum):
    EVAL = "eval"
    CORNERS = "corners"
    SWEEP = "sweep"
    ISOTHERMAL = "isothermal"
    VERIFY = "verify"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


RequestT = TypeVar("RequestT", bound=BaseModel)


class RunConfig(BaseModel):
    """One CLI invocation.

    Physical fields left as None fall back to the defaults of the request
    the command builds, so `isothermal` and `eval` can share flags while
    keeping their own defaults (J = B for isothermal bumps).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command

    kind: Optional[CycleKind] = None
    B: Optional[float] = None
    J: Optional[float] = None
    gamma: Optional[float] = None
    delta: Optional[float] = None
    model: Optional[PairModel] = None
    r: Optional[float] = None
    phi: Optional[float] = None
    beta: Optional[float] = None
    kT: Optional[float] = None

    lo: Optional[float] = None
    hi: Optional[float] = None
    n: Optional[int] = None
    hold: Optional[SweepHold] = None
    anchor_force: Optional[float] = None

    bump: Optional[BumpKind] = None
    step: Optional[float] = None

    tol_root: Optional[float] = Field(default=None, gt=0.0)
    tol_quad: Optional[float] = Field(default=None, gt=0.0)
    format: OutputFormat = OutputFormat.JSON
    output: Optional[str] = None
    oracle: bool = False
    workers: Optional[int] = Field(default=None, ge=1)

    def _request(self, model: Type[RequestT]) -> RequestT:
        values = {
            name: value
            for name, value in self.model_dump(exclude_none=True).items()
            if name in model.model_fields
        }
        return model(**values)

    def cycle_request(self) -> CycleRequest:
        return self._request(CycleRequest)

    def sweep_request(self) -> SweepRequest:
        return self._request(SweepRequest)

    def isothermal_request(self) -> IsothermalRequest:
        request = self._request(IsothermalRequest)
        if self.J is None:
            request = IsothermalRequest(
                **{**request.model_dump(exclude_none=True), "J": request.B}
            )
        return request

    def tolerances(self, base: Tolerances) -> Tolerances:
        """base with --tol-root / --tol-quad applied."""
        return Tolerances(
            root_rel=self.tol_root or base.root_rel,
            quad_rel=self.tol_quad or base.quad_rel,
            fd_step=base.fd_step,
        )
