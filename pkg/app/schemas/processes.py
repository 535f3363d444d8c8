"""
Pydantic schemas for quasi-static processes and their heat/work balances.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.substances import ThermalPoint


class PathKind(str, Enum):
    """The quasi-static process a path realizes."""

    ISOBAR_X = "isobar_x"
    ISOBAR_Y = "isobar_y"
    ADIABAT = "adiabat"
    ISOCHORE = "isochore"
    ISOTHERM = "isotherm"


class PathVariable(str, Enum):
    """Quantity the path grid is laid out in."""

    X = "X"  # 1/B, J fixed
    Y = "Y"  # 1/J, B fixed
    SCALE = "scale"  # adiabat scale factor, B -> B/s, J -> J/s, beta -> s*beta
    BETA = "beta"  # levels fixed
    B = "B"  # beta and J fixed
    J = "J"  # beta and B fixed


class HeldQuantity(BaseModel):
    """The quantity a path keeps constant."""

    model_config = ConfigDict(frozen=True)

    name: str
    value: Optional[float] = None


class Path(BaseModel):
    """Ordered, densely sampled ThermalPoints realizing one process."""

    model_config = ConfigDict(frozen=True)

    kind: PathKind
    variable: PathVariable
    grid: tuple[float, ...]
    points: tuple[ThermalPoint, ...]
    held: HeldQuantity

    @model_validator(mode="after")
    def check_samples(self) -> "Path":
        if len(self.points) < 2:
            raise ValueError("A path needs at least two points")
        if len(self.grid) != len(self.points):
            raise ValueError("grid and points must have equal length")
        return self

    @property
    def start(self) -> ThermalPoint:
        return self.points[0]

    @property
    def end(self) -> ThermalPoint:
        return self.points[-1]

    def reversed(self) -> "Path":
        """The same process traversed from its end back to its start."""
        return self.model_copy(
            update={
                "grid": tuple(reversed(self.grid)),
                "points": tuple(reversed(self.points)),
            }
        )


class HeatWork(BaseModel):
    """Heat absorbed, work done by the substance and energy change on a path."""

    model_config = ConfigDict(frozen=True)

    Q: float
    W_by: float
    dU: float
    # Local heat of one spin, when requested for a coupled pair
    Q_loc: Optional[float] = None

    @property
    def first_law_residual(self) -> float:
        return self.dU - (self.Q - self.W_by)


class HeatDirection(str, Enum):
    ABSORB = "absorb"
    RELEASE = "release"
    NONE = "none"


class BumpKind(str, Enum):
    DB = "dB"
    DJ = "dJ"


class IsothermalDirections(BaseModel):
    """Heat directions for a small isothermal bump at B = J, low T."""

    model_config = ConfigDict(frozen=True)

    bump: BumpKind
    step: float = Field(gt=0.0)
    total_heat: float
    local_heat: float
    total_heat_sign: HeatDirection
    local_heat_sign: HeatDirection
    p_e_start: float
    p_e_end: float
