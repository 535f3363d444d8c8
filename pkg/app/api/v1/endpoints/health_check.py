from typing import Any, Dict

from fastapi import APIRouter, status

from app import __version__
from app.config import settings

router = APIRouter()
logger = settings.get_logger(__name__)


@router.get("/health-check", status_code=status.HTTP_200_OK)
def health_check() -> Dict[str, Any]:
    """
    ## Service liveness, with the running version

    return 200
    """
    return {
        "message": f"{settings.PROJECT_NAME} - service active",
        "version": __version__,
    }
