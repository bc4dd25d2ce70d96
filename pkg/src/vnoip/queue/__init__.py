"""Run queue for training tasks."""
from .manager import RunQueue
from .task import TrainingTask

__all__ = ["RunQueue", "TrainingTask"]
