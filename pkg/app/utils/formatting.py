"""
Deterministic rendering of results for stdout and files.
"""

import json
import math
from typing import Any, Optional

from pydantic import BaseModel

from app.config import settings


def round_significant(value: Any, digits: Optional[int] = None) -> Any:
    """Round every float inside value to the given significant digits.

    Dicts, lists and tuples are walked; infinities and NaN are kept.
    """
    digits = digits or settings.OUTPUT_DIGITS
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return value
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_significant(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v, digits) for v in value]
    return value


def to_json(payload: Any, digits: Optional[int] = None) -> str:
    """JSON text of a model, a list of models or plain data."""
    if isinstance(payload, BaseModel):
        data = payload.model_dump(mode="json")
    elif isinstance(payload, list):
        data = [
            item.model_dump(mode="json")
            if isinstance(item, BaseModel)
            else item
            for item in payload
        ]
    else:
        data = payload
    return json.dumps(round_significant(data, digits), indent=2) + "\n"
