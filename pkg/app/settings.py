"""
Ambient configuration.

Values come from `LAB_*` environment variables or a `.env` file next to the
working directory. Nothing here is required; every field has a default.
"""

from functools import lru_cache
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class LabSettings(BaseSettings):
    """Numerical defaults shared by every command."""

    model_config = SettingsConfigDict(env_prefix="LAB_", env_file=".env", extra="ignore")

    log_level: LogLevel = Field(default="INFO", description="Root logging level.")
    slit_cells: int = Field(
        default=129,
        ge=11,
        description="Grid cells per slit width L. Odd, so the slit edges fall on cell boundaries.",
    )
    sinc_lobes: float = Field(
        default=100.0,
        ge=50.0,
        description="Half-width of the default grid in units of 2ħ/B.",
    )
    grid_exponent_cap: int = Field(default=20, ge=8, le=24, description="Largest default grid is 2**cap points.")
    aliasing_tolerance: float = Field(
        default=1e-3,
        gt=0.0,
        description="Largest norm fraction allowed in the outermost 1% of momentum bins.",
    )
    fit_max_iterations: int = Field(default=500, ge=10, description="Function-evaluation cap for fringe fits.")
    fft_workers: int = Field(default=1, description="Worker threads handed to scipy.fft (-1 uses all cores).")

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper_level(cls, value):
        return value.upper() if isinstance(value, str) else value


@lru_cache
def get_settings() -> LabSettings:
    """Return the process-wide settings instance."""
    return LabSettings()
