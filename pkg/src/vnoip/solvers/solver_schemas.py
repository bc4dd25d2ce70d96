"""Schemas for ODE solver configuration."""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SolveConfig(BaseModel):
    """Settings shared by the fixed-step and adaptive solvers."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    method: Literal["euler", "dopri5"] = Field("dopri5", description="Integration method")
    step: float = Field(0.05, description="Fixed Euler step in normalized time units")
    rtol: float = Field(1e-5, description="Relative tolerance of the adaptive solver")
    atol: float = Field(1e-6, description="Absolute tolerance of the adaptive solver")
    max_steps: int = Field(10_000, description="Step budget per solve (accepted and rejected)")
    safety: float = Field(0.9, description="Safety factor of the step-size controller")
    min_factor: float = Field(0.2, description="Smallest step-size shrink factor")
    max_factor: float = Field(10.0, description="Largest step-size growth factor")

    @field_validator("step", "rtol", "atol", "safety")
    def must_be_positive(cls, v: float) -> float:
        """Validate that step sizes, tolerances and safety are positive."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("max_steps")
    def max_steps_must_be_positive(cls, v: int) -> int:
        """Validate that the step budget is positive."""
        if v <= 0:
            raise ValueError("max_steps must be positive")
        return v

    @field_validator("min_factor")
    def min_factor_in_unit_interval(cls, v: float) -> float:
        """Validate that a rejected step shrinks without collapsing to zero."""
        if not 0.0 < v <= 1.0:
            raise ValueError("min_factor must be in (0, 1]")
        return v

    @field_validator("max_factor")
    def max_factor_must_exceed_one(cls, v: float) -> float:
        """Validate that the controller can grow the step."""
        if v <= 1.0:
            raise ValueError("max_factor must be greater than 1")
        return v


EULER_DEFAULT = SolveConfig(method="euler")
DOPRI5_DEFAULT = SolveConfig(method="dopri5")
