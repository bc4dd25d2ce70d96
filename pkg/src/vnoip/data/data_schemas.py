"""Cascade records and the generator and protocol settings."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.errors import DataError, OrderingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RepostEvent:
    """User ``child`` forwarded the item from ``parent`` at ``time`` after publication."""
    parent: int
    child: int
    time: float


@dataclass(frozen=True)
class Cascade:
    """One information cascade.

    Event times are relative to the publish time and sorted ascending. The
    popularity at time t counts the root plus every event with time <= t.
    """
    cascade_id: str
    root: int
    publish_time: float
    events: Tuple[RepostEvent, ...] = ()
    _times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        times = np.array([e.time for e in events], dtype=np.float64)
        if np.any(times < 0.0):
            raise DataError(f"cascade {self.cascade_id}: event before publication")
        if np.any(np.diff(times) < 0.0):
            raise DataError(f"cascade {self.cascade_id}: event times are not sorted")
        seen = {self.root}
        for event in events:
            if event.parent not in seen:
                raise OrderingError(f"cascade {self.cascade_id}: parent {event.parent} of "
                                    f"{event.child} has not appeared yet")
            seen.add(event.child)
        times.setflags(write=False)
        object.__setattr__(self, "_times", times)

    @property
    def event_times(self) -> np.ndarray:
        return self._times

    @property
    def size(self) -> int:
        """Final popularity: root plus all events."""
        return len(self.events) + 1

    def popularity_at(self, t: float) -> int:
        """P(t), the root plus the events at or before ``t``."""
        return 1 + int(np.searchsorted(self._times, t, side="right"))

    def popularity_curve(self) -> Tuple[np.ndarray, np.ndarray]:
        """Event-sampled popularity: times [0, t_1, ...] and values [1, 2, ...]."""
        times = np.concatenate([[0.0], self._times])
        return times, np.arange(1, len(times) + 1, dtype=np.float64)

    def observed(self, t_o: float) -> "Cascade":
        """Prefix of the cascade up to and including ``t_o``."""
        count = int(np.searchsorted(self._times, t_o, side="right"))
        return Cascade(self.cascade_id, self.root, self.publish_time, self.events[:count])

    def participants(self) -> List[int]:
        """Distinct users in order of first appearance."""
        order: Dict[int, None] = {self.root: None}
        for event in self.events:
            order.setdefault(event.child, None)
        return list(order)


class GenConfig(BaseModel):
    """Synthetic corpus settings: preferential-attachment graph plus branching cascades."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_users: int = Field(1000, description="Number of users in the global graph")
    attachment_edges: int = Field(2, description="Edges added per new user during graph growth")
    attachment_exponent: float = Field(1.0, description="Preferential attachment exponent on degree")
    n_cascades: int = Field(200, description="Number of cascades")
    base_rate: float = Field(1.0, description="Arrival rate of new cascades (publish times)")
    branching: float = Field(0.6, description="Mean offspring per repost event; must be < 1")
    root_influence: float = Field(30.0, description="Root offspring mean as a multiple of the branching factor")
    influence_shape: float = Field(2.0, description="Gamma shape of the per-cascade root influence multiplier")
    decay: float = Field(1.0, description="Exponential decay rate of the excitation kernel")
    horizon: float = Field(10.0, description="Time span simulated for every cascade")
    max_events: int = Field(1000, description="Event cap per cascade")
    seed: int = Field(42, description="Seed fixing all randomness")

    @field_validator("n_users", "attachment_edges", "n_cascades", "max_events")
    def must_be_positive_int(cls, v: int) -> int:
        """Validate positive counts."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("base_rate", "decay", "horizon", "influence_shape")
    def must_be_positive(cls, v: float) -> float:
        """Validate positive rates and spans."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("branching", "root_influence", "attachment_exponent")
    def must_be_non_negative(cls, v: float) -> float:
        """Validate non-negative intensities."""
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @model_validator(mode="after")
    def graph_can_grow(self) -> "GenConfig":
        """Validate that the seed clique fits in the user population."""
        if self.attachment_edges >= self.n_users:
            raise ValueError("attachment_edges must be smaller than n_users")
        return self


class ProtocolConfig(BaseModel):
    """Observation/prediction horizons, filtering and splitting."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    observation_time: float = Field(3.0, description="End of the observation window t_o")
    prediction_time: float = Field(10.0, description="Prediction horizon t_p")
    n_grid: int = Field(8, description="Future grid points T between t_o and t_p")
    min_participants: int = Field(10, description="Minimum participants observed by t_o")
    split_ratios: Tuple[float, float, float] = Field((0.7, 0.15, 0.15), description="Train/validation/test ratios")
    split_seed: int = Field(0, description="Seed of the split shuffle")
    max_sequence: int = Field(100, description="Positions kept per cascade, root included")

    @field_validator("observation_time")
    def observation_must_be_positive(cls, v: float) -> float:
        """Validate a positive observation window."""
        if v <= 0:
            raise ValueError("observation_time must be positive")
        return v

    @field_validator("n_grid", "max_sequence")
    def must_be_positive(cls, v: int) -> int:
        """Validate positive sizes."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("split_ratios")
    def ratios_must_sum_to_one(cls, v: Tuple[float, float, float]) -> Tuple[float, float, float]:
        """Validate non-negative ratios summing to 1."""
        if any(r < 0 for r in v) or abs(sum(v) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must be non-negative and sum to 1, got {v}")
        return v

    @model_validator(mode="after")
    def horizon_after_observation(self) -> "ProtocolConfig":
        """Validate t_p > t_o."""
        if self.prediction_time <= self.observation_time:
            raise ValueError("prediction_time must exceed observation_time")
        return self
