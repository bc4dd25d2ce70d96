"""Request and response models of the run service."""
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..data.data_schemas import ProtocolConfig
from ..graphs.graph_schemas import EmbeddingConfig
from ..model.model_schemas import ModelConfig
from ..training.training_schemas import RunConfig, TrainConfig
from ..utils.config import build_config, data_dir


class RunRequest(BaseModel):
    """A training run submitted to the queue.

    Section dictionaries override the defaults of the matching config
    object; unknown keys are rejected when the run is built.
    """
    model_config = ConfigDict(extra="forbid")

    name: str = Field("run", min_length=1, description="Name of the run")
    data_dir: Optional[str] = Field(None, description="Corpus directory; VNOIP_DATA_DIR by default")
    run_dir: Optional[str] = Field(None, description="Output directory; <data_dir>/runs/<name> by default")
    model: Dict[str, Any] = Field(default_factory=dict, description="ModelConfig overrides")
    train: Dict[str, Any] = Field(default_factory=dict, description="TrainConfig overrides")
    protocol: Dict[str, Any] = Field(default_factory=dict, description="ProtocolConfig overrides")
    embedding: Dict[str, Any] = Field(default_factory=dict, description="EmbeddingConfig overrides")
    workers: int = Field(1, ge=1, description="Featurization processes")

    def to_run_config(self) -> RunConfig:
        """Validate every section and assemble the run.

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        corpus = Path(self.data_dir) if self.data_dir else data_dir()
        run_dir = Path(self.run_dir) if self.run_dir else corpus / "runs" / self.name
        return build_config(RunConfig, {
            "name": self.name,
            "data_dir": str(corpus),
            "run_dir": str(run_dir),
            "model": build_config(ModelConfig, self.model),
            "train": build_config(TrainConfig, self.train),
            "protocol": build_config(ProtocolConfig, self.protocol),
            "embedding": build_config(EmbeddingConfig, self.embedding),
            "workers": self.workers,
        })


class QueueStatus(BaseModel):
    """Response model for queue status."""
    active_task_id: Optional[str] = Field(None, description="ID of the currently running task")
    task_count: int = Field(..., description="Number of tasks in the queue")
    task_counts: Dict[str, int] = Field(default_factory=dict, description="Tasks per status")
    is_processing: bool = Field(..., description="Whether the queue is processing tasks")
    is_paused: bool = Field(..., description="Whether the queue is paused")


class QueueControl(BaseModel):
    """Request model for queue control."""
    action: str = Field(..., description="Action to perform (start/pause/resume/stop)")

    @field_validator("action")
    def action_must_be_valid(cls, v: str) -> str:
        """Validate that action is one of the allowed values."""
        allowed = {"start", "pause", "resume", "stop"}
        if v not in allowed:
            raise ValueError(f"action must be one of {sorted(allowed)}")
        return v


class WebSocketMessage(BaseModel):
    """Message sent by a websocket client."""
    type: Literal["REQUEST_STATE", "STOP_RUN"] = Field(..., description="Message type")
    data: Dict[str, Any] = Field(default_factory=dict, description="Message payload")


class APIResponse(BaseModel):
    """Standard API response format."""
    status: Literal["success", "error"] = Field(..., description="Response status")
    data: Optional[Dict[str, Any]] = Field(None, description="Response data")
    error: Optional[Dict[str, Any]] = Field(None, description="Error details")
