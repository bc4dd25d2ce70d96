"""Reference predictors the trained model is compared against."""
import logging
from typing import Sequence

import numpy as np

from ..data.sample import CascadeSample
from ..utils.errors import ConfigError, EmptySequenceError

logger = logging.getLogger(__name__)


class ConstantPredictor:
    """Predicts one value for every cascade: the MSLE-optimal constant of the training labels."""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def fit(self, labels: Sequence[float]) -> "ConstantPredictor":
        labels = np.asarray(labels, dtype=np.float64)
        if labels.size == 0:
            raise EmptySequenceError("no training labels")
        self.value = float(2.0 ** np.mean(np.log2(labels + 1.0)) - 1.0)
        logger.info(f"Constant baseline fitted: {self.value:.4f}")
        return self

    def predict(self, sample: CascadeSample) -> float:
        return self.value


class LastRatePredictor:
    """Extrapolates the repost rate seen over the last part of the observation window.

    Args:
        window_fraction: Share of [0, t_o] at its end used to measure the rate
    """

    def __init__(self, window_fraction: float = 0.25):
        if not 0.0 < window_fraction <= 1.0:
            raise ConfigError(f"window_fraction must be in (0, 1], got {window_fraction}")
        self.window_fraction = window_fraction

    def predict(self, sample: CascadeSample) -> float:
        t_o = sample.observation_time
        start = t_o * (1.0 - self.window_fraction)
        span = t_o - start
        times = sample.observed_times
        in_window = np.count_nonzero((times > start) & (times <= t_o))
        # Normalized time puts the horizon at 1.
        return float(in_window / span * (1.0 - t_o))
