"""Error metrics on the log2 popularity scale."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Protocol, Sequence

import numpy as np

from ..data.sample import CascadeSample
from ..utils.errors import DimensionError, EmptySequenceError

logger = logging.getLogger(__name__)


class Predictor(Protocol):
    def predict(self, sample: CascadeSample) -> float:
        ...


def _check(labels: Sequence[float], predictions: Sequence[float]):
    labels = np.asarray(labels, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    if labels.shape != predictions.shape:
        raise DimensionError(f"{labels.size} labels for {predictions.size} predictions")
    if labels.size == 0:
        raise EmptySequenceError("metrics need at least one prediction")
    return labels, predictions


def msle(labels: Sequence[float], predictions: Sequence[float]) -> float:
    """Mean of (log2(dP + 1) - log2(dP_hat + 1))^2."""
    labels, predictions = _check(labels, predictions)
    errors = (np.log2(labels + 1.0) - np.log2(predictions + 1.0)) ** 2
    return math.fsum(errors) / labels.size


def mape(labels: Sequence[float], predictions: Sequence[float]) -> float:
    """Mean of |log2(dP + 2) - log2(dP_hat + 2)| / log2(dP + 2)."""
    labels, predictions = _check(labels, predictions)
    scale = np.log2(labels + 2.0)
    errors = np.abs(scale - np.log2(predictions + 2.0)) / scale
    return math.fsum(errors) / labels.size


@dataclass(frozen=True)
class PredictionRecord:
    cascade_id: str
    label: float
    prediction: float

    def to_dict(self) -> Dict[str, object]:
        return {"cascade_id": self.cascade_id, "label": self.label, "prediction": self.prediction}


@dataclass(frozen=True)
class EvaluationResult:
    msle: float
    mape: float
    records: List[PredictionRecord] = field(default_factory=list)

    def to_dict(self) -> Dict[str, float]:
        return {"msle": self.msle, "mape": self.mape, "n": len(self.records)}


def evaluate(predictor: Predictor, samples: Sequence[CascadeSample]) -> EvaluationResult:
    """Score ``predictor`` on ``samples``.

    Predictions only ever see sealed copies of the samples. Records are
    ordered by cascade id.
    """
    records = sorted(
        (PredictionRecord(s.cascade_id, s.label, float(predictor.predict(s.seal()))) for s in samples),
        key=lambda r: r.cascade_id,
    )
    labels = [r.label for r in records]
    predictions = [r.prediction for r in records]
    result = EvaluationResult(msle=msle(labels, predictions), mape=mape(labels, predictions), records=records)
    logger.debug(f"Evaluated {len(records)} cascades: msle={result.msle:.4f} mape={result.mape:.4f}")
    return result
