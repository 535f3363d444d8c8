from fastapi import APIRouter

from app.api.v1.endpoints.cycles import router as cycles_router
from app.api.v1.endpoints.health_check import router as health_check_router

api_router = APIRouter()
api_router.include_router(
    health_check_router,
    tags=["Health Check"],
)

api_router.include_router(
    cycles_router,
    tags=["Cycles"],
)
