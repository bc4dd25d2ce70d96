"""Epoch loop with gradient accumulation, validation and early stopping."""
import asyncio
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..autodiff import Tape
from ..data.sample import CascadeSample
from ..model.vnoip import VNOIP, training_noise
from ..utils.errors import DataError, TrainingDivergedError
from ..utils.events import EventEmitter, EventType, create_training_event
from .adam import AdamState, adam_step
from .checkpoint import Checkpoint
from .metrics import evaluate
from .training_schemas import TrainConfig, config_hash

logger = logging.getLogger(__name__)


@dataclass
class TrainingResult:
    """Outcome of a training run; ``best_state`` holds the selected parameters."""
    best_epoch: int
    best_val_msle: float
    best_state: Dict[str, np.ndarray]
    history: List[Dict[str, float]] = field(default_factory=list)
    epochs_run: int = 0
    stopped_early: bool = False
    interrupted: bool = False

    def summary(self) -> Dict[str, Any]:
        return {
            "best_epoch": self.best_epoch,
            "best_val_msle": self.best_val_msle,
            "epochs_run": self.epochs_run,
            "stopped_early": self.stopped_early,
            "interrupted": self.interrupted,
        }


class Trainer(EventEmitter):
    """Trains a :class:`VNOIP` model with Adam.

    Each epoch shuffles the training cascades with a seeded generator,
    accumulates per-cascade gradients over batches of ``batch_size``,
    applies one Adam step per batch, then scores the validation set on the
    inference path. The parameters with the best validation MSLE are kept,
    and training stops after ``patience`` epochs without improvement.

    Args:
        model: Model to train in place
        config: Optimization settings
        task_id: Optional task ID attached to emitted events
    """

    def __init__(self, model: VNOIP, config: TrainConfig, task_id: Optional[str] = None):
        super().__init__()
        self.model = model
        self.config = config
        self.task_id = task_id
        self._stopped = False

    def stop(self) -> None:
        """Stop after the current cascade; the best parameters so far are kept."""
        self._stopped = True

    def _batch_gradients(self, samples: Sequence[CascadeSample], epoch: int, start: int) -> Dict[str, Any]:
        params = self.model.params
        totals = {name: np.zeros_like(value) for name, value in params.items()}
        losses = []
        for offset, sample in enumerate(samples):
            tape = Tape()
            bound = params.bind(tape)
            noise = training_noise(self.config.seed, epoch, start + offset, self.model.config.latent_dim)
            loss = self.model.loss(bound, sample, noise=noise, lambda_fit=self.config.lambda_fit,
                                   lambda_align=self.config.lambda_align)
            value = loss.total.item()
            if not math.isfinite(value):
                raise TrainingDivergedError(
                    f"non-finite loss on cascade {sample.cascade_id} in epoch {epoch}",
                    diagnostics={"epoch": epoch, "cascade_id": sample.cascade_id, **loss.as_dict()},
                )
            grads = tape.backward(loss.total)
            for name in totals:
                g = grads.get(bound[name])
                if g is None:
                    continue
                if not np.isfinite(g).all():
                    raise TrainingDivergedError(
                        f"non-finite gradient of {name} on cascade {sample.cascade_id} in epoch {epoch}",
                        diagnostics={"epoch": epoch, "cascade_id": sample.cascade_id, "parameter": name,
                                     **loss.as_dict()},
                    )
                totals[name] += g
            losses.append(value)
        scale = 1.0 / len(samples)
        return {"grads": {name: g * scale for name, g in totals.items()}, "losses": losses}

    async def train(self, train_samples: Sequence[CascadeSample],
                    val_samples: Sequence[CascadeSample]) -> TrainingResult:
        """Run the epoch loop and leave the best parameters in the model.

        Raises:
            DataError: If either split is empty
            TrainingDivergedError: If a loss or a parameter gradient becomes
                non-finite; its ``diagnostics`` name the epoch, cascade and loss parts
        """
        if not train_samples or not val_samples:
            raise DataError("training needs non-empty training and validation sets")
        cfg = self.config
        params = self.model.params
        rng = np.random.default_rng(cfg.seed)
        state = AdamState()
        result = TrainingResult(best_epoch=0, best_val_msle=math.inf, best_state=params.state_dict())
        self._stopped = False
        logger.info(f"Training {self.model.variant} model on {len(train_samples)} cascades, "
                    f"validating on {len(val_samples)}")

        try:
            for epoch in range(1, cfg.max_epochs + 1):
                order = rng.permutation(len(train_samples))
                epoch_losses: List[float] = []
                for start in range(0, len(order), cfg.batch_size):
                    if self._stopped:
                        break
                    batch = [train_samples[i] for i in order[start:start + cfg.batch_size]]
                    outcome = self._batch_gradients(batch, epoch, start)
                    state = adam_step(params, outcome["grads"], state, cfg.learning_rate,
                                      cfg.beta1, cfg.beta2, cfg.eps)
                    epoch_losses.extend(outcome["losses"])
                    batch_loss = float(np.mean(outcome["losses"]))
                    logger.debug(f"Epoch {epoch} batch at {start}: loss {batch_loss:.6f}")
                    await self.emit(create_training_event(
                        EventType.BATCH_COMPLETED, self.task_id,
                        epoch=epoch, batch_start=start, loss=batch_loss,
                    ))
                    await asyncio.sleep(0)
                if self._stopped:
                    result.interrupted = True
                    logger.info(f"Training stopped during epoch {epoch}")
                    break

                val_msle = evaluate(self.model, val_samples).msle
                train_loss = float(np.mean(epoch_losses))
                result.epochs_run = epoch
                result.history.append({"epoch": epoch, "train_loss": train_loss, "val_msle": val_msle})
                if val_msle < result.best_val_msle:
                    result.best_val_msle = val_msle
                    result.best_epoch = epoch
                    result.best_state = params.state_dict()
                    await self.emit(create_training_event(
                        EventType.NEW_BEST_FOUND, self.task_id, epoch=epoch, val_msle=val_msle,
                    ))
                logger.info(f"Epoch {epoch}: train loss {train_loss:.4f}, val MSLE {val_msle:.4f} "
                            f"(best {result.best_val_msle:.4f} at {result.best_epoch})")
                await self.emit(create_training_event(
                    EventType.EPOCH_COMPLETED, self.task_id,
                    epoch=epoch, train_loss=train_loss, val_msle=val_msle,
                    best_val_msle=result.best_val_msle, best_epoch=result.best_epoch,
                ))
                if epoch - result.best_epoch >= cfg.patience:
                    result.stopped_early = True
                    logger.info(f"No improvement for {cfg.patience} epochs, stopping at epoch {epoch}")
                    await self.emit(create_training_event(
                        EventType.EARLY_STOPPED, self.task_id, epoch=epoch, best_epoch=result.best_epoch,
                    ))
                    break
        except TrainingDivergedError as e:
            logger.error(f"Training diverged: {e} {e.diagnostics}")
            await self.emit(create_training_event(
                EventType.TRAINING_ERROR, self.task_id, error=str(e), diagnostics=e.diagnostics,
            ))
            raise

        params.load_state(result.best_state)
        await self.emit(create_training_event(EventType.TRAINING_COMPLETED, self.task_id, **result.summary()))
        return result

    def checkpoint(self, result: TrainingResult, **extra: Any) -> Checkpoint:
        """Checkpoint of the selected parameters with the run's metadata."""
        metadata = {
            "epoch": result.best_epoch,
            "best_val_msle": result.best_val_msle,
            "config_hash": config_hash(self.model.config, self.config),
            "model_config": self.model.config.model_dump(mode="json"),
            "train_config": self.config.model_dump(mode="json"),
            "n_grid": self.model.n_grid,
            **extra,
        }
        return Checkpoint(params=result.best_state, metadata=metadata)
