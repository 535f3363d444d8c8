"""
Pydantic schemas for quantum Brayton cycles, their reports and sweeps.
"""

import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.substances import CoupledPair, SpinHalf, ThermalPoint


class CycleKind(str, Enum):
    """Which generalized force the two isobars hold."""

    FIXED_FX = "fixed-fx"
    FIXED_FY = "fixed-fy"
    SINGLE_SPIN = "single-spin"


class BraytonSpec(BaseModel):
    """A reversible Brayton cycle given by its anchor corner and two ratios.

    r is the compression ratio of stage 1 (X_A/X_B, or Y_A/Y_B for fixed
    F_y) and phi the pressure ratio F_low/F_high. The high force is the
    anchor's own force.
    """

    model_config = ConfigDict(frozen=True)

    kind: CycleKind
    anchor: ThermalPoint
    r: float = Field(gt=1.0)
    # phi = 1 collapses both isobars onto one line
    phi: float = Field(gt=0.0, le=1.0)

    @model_validator(mode="after")
    def check_substance(self) -> "BraytonSpec":
        substance = self.anchor.substance
        if self.kind is CycleKind.SINGLE_SPIN:
            if not isinstance(substance, SpinHalf):
                raise ValueError("single-spin cycles need a SpinHalf anchor")
        elif not isinstance(substance, CoupledPair):
            raise ValueError(f"{self.kind.value} cycles need a CoupledPair")
        elif self.kind is CycleKind.FIXED_FY and substance.J <= 0.0:
            raise ValueError("fixed-fy cycles need J > 0 at the anchor")
        return self

    @property
    def lam(self) -> float:
        return 1.0 / math.sqrt(self.phi)


class CornerSet(BaseModel):
    """The four corners A, B, C, D of a solved Brayton cycle."""

    model_config = ConfigDict(frozen=True)

    kind: CycleKind
    A: ThermalPoint
    B: ThermalPoint
    C: ThermalPoint
    D: ThermalPoint
    # Adiabat scale factor, 1/sqrt(phi)
    lam: float = Field(gt=0.0)
    closure_residual: float = Field(ge=0.0)

    def corners(self) -> dict[str, ThermalPoint]:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}


class CycleReport(BaseModel):
    """Heats, work and efficiency of a cycle and of one of its subsystems.

    Heats follow the absorbed-is-positive convention except q_out, which is
    the heat released in stage 3 as a positive number. q1_loc and q2_loc are
    the signed local heats absorbed in stages 1 and 3.
    """

    model_config = ConfigDict(frozen=True)

    kind: CycleKind
    q_in: float
    q_out: float
    w_net: float
    eta: float
    q1_loc: float
    q2_loc: float
    w_loc: float
    # Undefined unless the subsystem runs as an engine
    eta_loc: Optional[float] = None
    refrigerator: bool
    p_e_a: float
    p_e_b: float
    w_ratio: Optional[float] = None
    coupling_work: Optional[float] = None


class SweepHold(str, Enum):
    """What stays fixed at corner A while J/B is swept."""

    ANCHOR_FORCE = "force"
    ANCHOR_TEMPERATURE = "temperature"


class SweepSpec(BaseModel):
    """A J/B sweep of a Brayton cycle template."""

    model_config = ConfigDict(frozen=True)

    lo: float = Field(ge=0.0)
    hi: float = Field(ge=0.0)
    n: int = Field(ge=2)
    hold: SweepHold = SweepHold.ANCHOR_TEMPERATURE
    cycle: BraytonSpec
    # Held F_high for hold=force; defaults to the template anchor's force
    anchor_force: Optional[float] = Field(default=None, lt=0.0)

    @model_validator(mode="after")
    def check_range(self) -> "SweepSpec":
        if self.hi < self.lo:
            raise ValueError("sweep range must satisfy lo <= hi")
        if self.cycle.kind is CycleKind.SINGLE_SPIN:
            raise ValueError("single-spin cycles have no J/B to sweep")
        if self.cycle.kind is CycleKind.FIXED_FY and self.lo <= 0.0:
            raise ValueError("fixed-fy sweeps need J/B > 0")
        return self

    def grid(self) -> list[float]:
        step = (self.hi - self.lo) / (self.n - 1)
        return [self.lo + i * step for i in range(self.n)]


CSV_COLUMNS = (
    "j_over_b",
    "beta_a",
    "f_high",
    "q_in",
    "q_out",
    "w_net",
    "w_loc",
    "w_ratio",
    "eta",
    "eta_loc",
    "refrigerator",
    "feasible",
)


class SweepRow(BaseModel):
    """One sweep point; infeasible points keep only j_over_b and detail."""

    model_config = ConfigDict(frozen=True)

    j_over_b: float
    beta_a: Optional[float] = None
    f_high: Optional[float] = None
    q_in: Optional[float] = None
    q_out: Optional[float] = None
    w_net: Optional[float] = None
    w_loc: Optional[float] = None
    w_ratio: Optional[float] = None
    eta: Optional[float] = None
    eta_loc: Optional[float] = None
    refrigerator: Optional[bool] = None
    feasible: bool
    detail: Optional[str] = None
