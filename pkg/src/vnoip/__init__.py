"""VNOIP: variational neural-ODE popularity prediction for information cascades."""

from vnoip.model import VNOIP, ModelConfig
from vnoip.queue import RunQueue, TrainingTask
from vnoip.training import RunConfig, TrainConfig, Trainer, evaluate, run_experiment

__version__ = "0.1.0"

__all__ = [
    "VNOIP", "ModelConfig",
    "RunQueue", "TrainingTask",
    "RunConfig", "TrainConfig", "Trainer", "evaluate", "run_experiment",
]
