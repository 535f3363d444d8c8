"""
Pydantic schemas for working substances and their equilibrium states.

Units follow hbar = k = 1: fields and couplings are energies, beta is an
inverse energy. The internal parameterization is (B, J, beta); the
generalized coordinates X = 1/B, Y = 1/J (and L = 1/B for one spin) are
derived views.
"""

import math
from enum import Enum
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.exceptions import DomainError

# Gibbs probabilities are normalized by construction to a few ulps
NORMALIZATION_TOL = 1e-14


class Tolerances(BaseModel):
    """Tolerances shared by every numerical kernel."""

    model_config = ConfigDict(frozen=True)

    root_rel: float = Field(default=1e-12, gt=0.0, le=1e-6)
    quad_rel: float = Field(default=1e-9, gt=0.0, le=1e-6)
    # Relative to the argument scale max(1, |x|)
    fd_step: float = Field(default=1e-6, gt=0.0)


class Coordinate(str, Enum):
    """Generalized coordinate a force is conjugate to."""

    X = "X"  # 1/B (or L for a single spin)
    Y = "Y"  # 1/J


class PairModel(str, Enum):
    """Hamiltonian family of a coupled spin pair."""

    XX = "xx"
    GENERAL_XY = "general_xy"


class SpinHalf(BaseModel):
    """A single spin-1/2 in a field, H = (1/2) B sigma_z."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["spin_half"] = "spin_half"
    B: float = Field(gt=0.0)

    @property
    def L(self) -> float:
        return 1.0 / self.B

    @property
    def X(self) -> float:
        return 1.0 / self.B

    def with_params(
        self, B: Optional[float] = None, J: Optional[float] = None
    ) -> "SpinHalf":
        # A lone spin has no coupling; J is accepted and ignored
        return self.model_copy(update={"B": self.B if B is None else B})


class CoupledPair(BaseModel):
    """Two spin-1/2s with XX (or general XY plus Delta) exchange coupling."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["coupled_pair"] = "coupled_pair"
    B: float = Field(gt=0.0)
    # Antiferromagnetic or uncoupled only
    J: float = Field(ge=0.0)
    model: PairModel = PairModel.XX
    gamma: float = 0.0
    delta: float = 0.0

    @model_validator(mode="after")
    def check_anisotropy(self) -> "CoupledPair":
        if self.model is PairModel.XX and (self.gamma or self.delta):
            raise ValueError(
                "The XX model takes no anisotropy; use model='general_xy'"
            )
        return self

    @property
    def X(self) -> float:
        return 1.0 / self.B

    @property
    def Y(self) -> float:
        if self.J == 0.0:
            raise DomainError(
                "Coordinate Y = 1/J is undefined for an uncoupled pair",
                quantity="Y",
                value=self.J,
            )
        return 1.0 / self.J

    def with_params(
        self, B: Optional[float] = None, J: Optional[float] = None
    ) -> "CoupledPair":
        update = {}
        if B is not None:
            update["B"] = B
        if J is not None:
            update["J"] = J
        return self.model_copy(update=update)


Substance = Annotated[Union[SpinHalf, CoupledPair], Field(discriminator="kind")]


class Level(BaseModel):
    """One energy eigenvalue with its eigenstate label."""

    model_config = ConfigDict(frozen=True)

    label: str
    energy: float


class Spectrum(BaseModel):
    """Closed-form spectrum of a substance, in the conventional level order."""

    model_config = ConfigDict(frozen=True)

    substance: Substance
    levels: tuple[Level, ...]

    @property
    def energies(self) -> tuple[float, ...]:
        return tuple(level.energy for level in self.levels)


class ThermalPoint(BaseModel):
    """Gibbs state of a substance at inverse temperature beta."""

    model_config = ConfigDict(frozen=True)

    substance: Substance
    beta: float = Field(gt=0.0)
    energies: tuple[float, ...]
    probs: tuple[float, ...]
    # ln Z is stored instead of Z so low temperatures do not overflow
    log_z: float

    @model_validator(mode="after")
    def check_normalization(self) -> "ThermalPoint":
        if len(self.probs) != len(self.energies):
            raise ValueError("probs and energies must have equal length")
        if abs(math.fsum(self.probs) - 1.0) > NORMALIZATION_TOL:
            raise ValueError("Gibbs probabilities must sum to one")
        return self

    @property
    def Z(self) -> float:
        return math.exp(self.log_z)

    @property
    def T(self) -> float:
        return 1.0 / self.beta


class LocalState(BaseModel):
    """Reduced state of one spin of a pair, read as a local Gibbs state."""

    model_config = ConfigDict(frozen=True)

    p_e: float = Field(ge=0.0, le=1.0)
    beta_loc: float
    F_loc: float

    @property
    def T_loc(self) -> float:
        return math.inf if self.beta_loc == 0.0 else 1.0 / self.beta_loc
