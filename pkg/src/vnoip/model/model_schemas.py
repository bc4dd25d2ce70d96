"""Schemas for model architecture configuration."""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..solvers import SolveConfig

Variant = Literal["full", "forward_only", "no_trend", "no_variational", "no_distillation"]
VARIANTS = ("full", "forward_only", "no_trend", "no_variational", "no_distillation")


class ModelConfig(BaseModel):
    """Architecture and solver settings of a VNOIP model."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: Variant = Field("full", description="Model variant; everything but 'full' is an ablation")
    hidden_dim: int = Field(64, description="Hidden state size h of the jump ODE")
    latent_dim: int = Field(64, description="Latent size z of the trend ODE")
    embed_dim: int = Field(40, description="Size d of the global and cascade node embeddings")
    decoder_layers: Literal[1, 2] = Field(2, description="Linear layers in the decoder f_d")
    euler_step: float = Field(0.05, description="Euler step for inter-event drift, normalized time")
    euler_max_steps: int = Field(10_000, description="Euler step budget per inter-event interval")
    trend_rtol: float = Field(1e-5, description="Relative tolerance of the trend solver")
    trend_atol: float = Field(1e-6, description="Absolute tolerance of the trend solver")
    trend_max_steps: int = Field(10_000, description="Step budget of one trend solve")

    @field_validator("hidden_dim", "latent_dim", "euler_max_steps", "trend_max_steps")
    def must_be_positive_int(cls, v: int) -> int:
        """Validate that sizes and budgets are positive."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("embed_dim")
    def embed_dim_must_be_even(cls, v: int) -> int:
        """Validate that the temporal encoding can fill the embedding."""
        if v <= 0 or v % 2:
            raise ValueError("embed_dim must be a positive even number")
        return v

    @field_validator("euler_step", "trend_rtol", "trend_atol")
    def must_be_positive(cls, v: float) -> float:
        """Validate that steps and tolerances are positive."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    def sequence_solver(self) -> SolveConfig:
        return SolveConfig(method="euler", step=self.euler_step, max_steps=self.euler_max_steps)

    def trend_solver(self) -> SolveConfig:
        return SolveConfig(method="dopri5", rtol=self.trend_rtol, atol=self.trend_atol,
                           max_steps=self.trend_max_steps)
