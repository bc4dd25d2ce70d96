"""Optimization, evaluation, checkpoints and end-to-end runs."""
from .adam import AdamState, adam_step
from .baselines import ConstantPredictor, LastRatePredictor
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .gradcheck_suite import GradCheckRecord, run_gradcheck_suite
from .metrics import EvaluationResult, PredictionRecord, evaluate, mape, msle
from .pipeline import (
    RunOutcome, Splits, checkpoint_splits, evaluate_checkpoint, generate_corpus, load_corpus, load_model,
    load_or_embed, load_splits, prepare_splits, run_experiment, write_predictions,
)
from .trainer import Trainer, TrainingResult
from .training_schemas import RunConfig, TrainConfig, config_hash

__all__ = [
    "AdamState", "adam_step",
    "ConstantPredictor", "LastRatePredictor",
    "Checkpoint", "load_checkpoint", "save_checkpoint",
    "GradCheckRecord", "run_gradcheck_suite",
    "EvaluationResult", "PredictionRecord", "evaluate", "mape", "msle",
    "RunOutcome", "Splits", "checkpoint_splits", "evaluate_checkpoint", "generate_corpus", "load_corpus",
    "load_model", "load_or_embed", "load_splits", "prepare_splits", "run_experiment", "write_predictions",
    "Trainer", "TrainingResult",
    "RunConfig", "TrainConfig", "config_hash",
]
