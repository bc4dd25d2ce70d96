"""Model-ready cascade samples with an inference-time seal on future popularity."""
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from ..utils.errors import LeakageError

logger = logging.getLogger(__name__)

Trajectory = List[Tuple[float, float]]


@dataclass(frozen=True, eq=False)
class CascadeSample:
    """Featurized cascade in normalized time, where publication is 0 and t_p is 1.

    ``context_popularity`` is sampled at the retained event times.
    ``observed_times`` holds every event time up to t_o, including those cut
    from the sequence, and defaults to ``times``. The future grid popularity
    and the label are hidden once the sample is sealed for inference;
    reading them then raises :class:`LeakageError`.
    """
    cascade_id: str
    users: Tuple[int, ...]
    times: np.ndarray
    global_rows: np.ndarray
    cascade_rows: np.ndarray
    context_popularity: np.ndarray
    observation_time: float
    observed_popularity: float
    grid_times: np.ndarray
    grid_popularity_values: np.ndarray
    label_value: float
    observed_times: Optional[np.ndarray] = None
    sealed: bool = False

    def __post_init__(self):
        if self.observed_times is None:
            object.__setattr__(self, "observed_times", self.times)
        for name in ("times", "global_rows", "cascade_rows", "context_popularity",
                     "grid_times", "grid_popularity_values", "observed_times"):
            array = np.array(getattr(self, name), dtype=np.float64)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def n_events(self) -> int:
        return len(self.users)

    @property
    def context_trajectory(self) -> Trajectory:
        """Event-sampled (t, P) pairs ending with (t_o, P(t_o))."""
        points = [(float(t), float(p)) for t, p in zip(self.times, self.context_popularity)]
        if points[-1][0] < self.observation_time:
            points.append((self.observation_time, self.observed_popularity))
        return points

    def _guard(self, what: str) -> None:
        if self.sealed:
            raise LeakageError(f"cascade {self.cascade_id}: {what} read on the inference path")

    @property
    def grid_popularity(self) -> np.ndarray:
        """True popularity at the future grid times."""
        self._guard("future popularity")
        return self.grid_popularity_values

    @property
    def label(self) -> float:
        """Incremental popularity P(t_p) - P(t_o)."""
        self._guard("label")
        return self.label_value

    @property
    def target_trajectory(self) -> Trajectory:
        """Context trajectory followed by the future grid points."""
        self._guard("target trajectory")
        return self.context_trajectory + [
            (float(t), float(p)) for t, p in zip(self.grid_times, self.grid_popularity_values)
        ]

    def seal(self) -> "CascadeSample":
        """Copy for inference with every post-t_o value zeroed and guarded."""
        return replace(self, grid_popularity_values=np.zeros_like(self.grid_popularity_values),
                       label_value=0.0, sealed=True)
