"""Schemas for optimization settings."""
import hashlib
import json

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..data.data_schemas import ProtocolConfig
from ..graphs.graph_schemas import EmbeddingConfig
from ..model.model_schemas import ModelConfig


class TrainConfig(BaseModel):
    """Optimization settings of one training run."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    batch_size: int = Field(100, description="Cascades per gradient step")
    learning_rate: float = Field(2e-3, description="Adam learning rate")
    beta1: float = Field(0.9, description="Adam first-moment decay")
    beta2: float = Field(0.999, description="Adam second-moment decay")
    eps: float = Field(1e-8, description="Adam denominator offset")
    patience: int = Field(15, description="Epochs without validation improvement before stopping")
    max_epochs: int = Field(300, description="Epoch cap")
    lambda_fit: float = Field(0.3, description="Weight of the trend-fit term")
    lambda_align: float = Field(0.6, description="Weight of the KL and distillation terms")
    seed: int = Field(0, description="Seed for initialization, shuffling and latent noise")

    @field_validator("batch_size", "patience", "max_epochs")
    def must_be_positive_int(cls, v: int) -> int:
        """Validate that counts are positive."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("learning_rate", "eps")
    def must_be_positive(cls, v: float) -> float:
        """Validate that the step size and offset are positive."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("lambda_fit", "lambda_align")
    def weight_must_be_non_negative(cls, v: float) -> float:
        """Validate loss weights; zero switches a term off."""
        if v < 0:
            raise ValueError("loss weights must be non-negative")
        return v

    @field_validator("beta1", "beta2")
    def decay_in_unit_interval(cls, v: float) -> float:
        """Validate that moment decays lie in [0, 1)."""
        if not 0.0 <= v < 1.0:
            raise ValueError("moment decay must be in [0, 1)")
        return v

    @field_validator("seed")
    def seed_must_be_non_negative(cls, v: int) -> int:
        """Validate that the seed can key a numpy SeedSequence."""
        if v < 0:
            raise ValueError("seed must be non-negative")
        return v


def config_hash(*configs: BaseModel) -> str:
    """SHA-256 over the canonical JSON of the given configs, in order."""
    payload = json.dumps([[type(c).__name__, c.model_dump(mode="json")] for c in configs],
                         sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class RunConfig(BaseModel):
    """One end-to-end experiment: corpus, protocol, model and optimization settings."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field("run", description="Human-readable run name")
    data_dir: str = Field(..., description="Corpus directory written by 'gen' and 'embed'")
    run_dir: str = Field(..., description="Directory receiving the checkpoint, history and predictions")
    model: ModelConfig = Field(default_factory=ModelConfig, description="Architecture settings")
    train: TrainConfig = Field(default_factory=TrainConfig, description="Optimization settings")
    protocol: ProtocolConfig = Field(default_factory=ProtocolConfig, description="Observation and split settings")
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig, description="Embedding settings")
    workers: int = Field(1, description="Featurization processes")

    @field_validator("workers")
    def workers_must_be_positive(cls, v: int) -> int:
        """Validate the worker count."""
        if v <= 0:
            raise ValueError("workers must be positive")
        return v

    @model_validator(mode="after")
    def embedding_sizes_agree(self) -> "RunConfig":
        """Validate that the model reads embeddings of the size the providers produce."""
        if self.model.embed_dim != self.embedding.dim:
            raise ValueError(f"model embed_dim {self.model.embed_dim} differs from embedding dim {self.embedding.dim}")
        return self
