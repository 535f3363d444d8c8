"""
Schemas for the built-in invariant suite.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict


class CheckResult(BaseModel):
    """Outcome of one named invariant check.

    worst is the largest violation seen (a deviation, or a signed margin for
    inequality checks) and is compared against tolerance.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    worst: Optional[float] = None
    tolerance: Optional[float] = None
    detail: Optional[str] = None


class VerificationSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    checks: list[CheckResult]
    passed: bool
    failed: int
