import logging
import pathlib
from typing import Any

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# .env is read from the repository root, one level above app/
PROJECT_ROOT = pathlib.Path(__file__).resolve().parent.parent
ENV_FILE_PATH = PROJECT_ROOT / ".env"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=ENV_FILE_PATH,
        env_file_encoding="utf-8",
        extra="ignore",
    )

    PROJECT_NAME: str = "SpinBrayton"

    # Numerical kernels
    ROOT_REL_TOL: float = 1e-12
    QUAD_REL_TOL: float = 1e-9
    FD_STEP: float = 1e-6
    ROOT_MAX_ITER: int = 200
    QUAD_MAX_DOUBLINGS: int = 20

    # Inverse-temperature search window for isobar solves
    BETA_MIN: float = 1e-9
    BETA_MAX: float = 1e5
    # Largest beta ratio accepted between two consecutive isobar samples
    MAX_BETA_JUMP: float = 4.0

    # Paths and cycles
    PATH_SAMPLES: int = 257
    CLOSURE_TOL: float = 1e-8

    # Sweeps and output
    SWEEP_WORKERS: int = 1
    OUTPUT_DIGITS: int = 12

    @field_validator(
        "ROOT_REL_TOL", "QUAD_REL_TOL", "FD_STEP", mode="before"
    )
    @classmethod
    def parse_tolerance(cls, v: Any) -> float:
        if isinstance(v, str):
            v = v.strip()
        value = float(v)
        if value <= 0:
            raise ValueError(f"Tolerances must be strictly positive, got {v}")
        return value

    @field_validator("PATH_SAMPLES")
    @classmethod
    def check_path_samples(cls, v: int) -> int:
        if v < 33:
            raise ValueError(f"PATH_SAMPLES must be at least 33, got {v}")
        return v

    def default_tolerances(self):
        """Build the Tolerances record from the configured kernel settings."""
        from app.schemas.substances import Tolerances

        return Tolerances(
            root_rel=self.ROOT_REL_TOL,
            quad_rel=self.QUAD_REL_TOL,
            fd_step=self.FD_STEP,
        )

    # CORS Configuration
    BACKEND_CORS_ORIGINS: str = "http://localhost:3000,http://127.0.0.1:3000"

    @field_validator("BACKEND_CORS_ORIGINS", mode="before")
    @classmethod
    def parse_cors_origins(cls, v: Any) -> str:
        """Parse CORS origins from comma-separated string."""
        if isinstance(v, str):
            return v
        return ",".join(v) if isinstance(v, list) else str(v)

    def get_cors_origins(self) -> list[str]:
        """Get CORS origins as a list."""
        if not self.BACKEND_CORS_ORIGINS:
            return ["*"]
        return [
            origin.strip()
            for origin in self.BACKEND_CORS_ORIGINS.split(",")
            if origin.strip()
        ]

    # Logging; handlers write to stderr so CLI stdout stays machine-readable
    LOG_LEVEL: str = "INFO"

    def get_logger(self, name: str) -> logging.Logger:
        """Logger with one stderr handler at LOG_LEVEL."""
        logger = logging.getLogger(name)
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        handler.setFormatter(formatter)
        if not logger.handlers:
            logger.addHandler(handler)
        logger.setLevel(self.LOG_LEVEL.upper())
        return logger


settings = Settings()
