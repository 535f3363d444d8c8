"""
HTTP surface of SpinBrayton.

Run with `uvicorn app.main:app`. Domain and numerical failures raised by the
services are answered with 422 and the failing quantity in the detail.
"""

from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse
from pydantic import ValidationError
from starlette.middleware.cors import CORSMiddleware

from app import __version__
from app.api.v1.api import api_router as api_v1_router
from app.config import settings
from app.exceptions import DomainError, NumericalError

logger = settings.get_logger(__name__)

app = FastAPI(
    title=settings.PROJECT_NAME,
    version=__version__,
    description="Quantum Brayton cycles of one spin or a coupled spin pair.",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.get_cors_origins(),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(DomainError)
@app.exception_handler(ValidationError)
async def invalid_input_handler(request: Request, exc: Exception):
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": str(exc)},
    )


@app.exception_handler(NumericalError)
async def numerical_error_handler(request: Request, exc: NumericalError):
    logger.warning("%s %s failed: %s", request.method, request.url.path, exc)
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": str(exc), "parameters": exc.parameters},
    )


# Include API routers with version prefix
app.include_router(api_v1_router, prefix="/api/v1")
