"""One training run as a queue task."""
import asyncio
import logging
import time
from typing import Any, Dict, Mapping, Optional, Union

from ..training.pipeline import RunOutcome, Splits, run_experiment
from ..training.trainer import Trainer
from ..training.training_schemas import RunConfig
from ..utils.config import build_config
from ..utils.events import Event, EventEmitter, EventType, create_task_event

logger = logging.getLogger(__name__)

FINAL_STATES = ("completed", "failed", "stopped")


class TrainingTask(EventEmitter):
    """Runs :func:`run_experiment` for one :class:`RunConfig` in the background.

    Status moves pending -> running -> completed | failed | stopped. Trainer
    events are re-emitted by the task, and the latest epoch summary is kept in
    ``progress``.
    """

    def __init__(self, task_id: str, config: Union[RunConfig, Mapping[str, Any]],
                 splits: Optional[Splits] = None):
        """Initialize a training task.

        Args:
            task_id: Unique identifier for the task
            config: Run settings, either a RunConfig or its dictionary form
            splits: Featurized splits shared between tasks; loaded from the
                run's corpus directory when omitted

        Raises:
            ConfigError: If ``config`` is a dictionary that does not validate
        """
        super().__init__()
        self.task_id = task_id
        if not isinstance(config, RunConfig):
            config = build_config(RunConfig, config)
        self.config = config
        self.status = "pending"
        self.error: Optional[str] = None
        self.result: Optional[Dict[str, Any]] = None
        self.progress: Dict[str, Any] = {}
        self.outcome: Optional[RunOutcome] = None
        self._splits = splits
        self._trainer: Optional[Trainer] = None
        self._stop_requested = False
        self._run_task: Optional[asyncio.Task] = None
        self._start_time: Optional[float] = None

    @property
    def is_finished(self) -> bool:
        return self.status in FINAL_STATES

    async def _update_status(self, new_status: str) -> None:
        """Update the task status and emit a status change event."""
        old_status = self.status
        self.status = new_status
        await self.emit(create_task_event(
            EventType.TASK_STATUS_CHANGED,
            self.task_id,
            old_status=old_status,
            new_status=new_status,
        ))

    async def start(self) -> None:
        """Start training in a background asyncio task.

        Raises:
            ValueError: If the task is not pending
        """
        if self.status != "pending":
            raise ValueError(f"Cannot start task in {self.status} state")
        self._start_time = time.time()
        await self.emit(create_task_event(EventType.TASK_STARTED, self.task_id, name=self.config.name))
        await self._update_status("running")
        self._run_task = asyncio.create_task(self._run_training())

    async def stop(self) -> None:
        """Stop the task.

        A running trainer finishes its current cascade, restores the best
        parameters seen so far and the run directory is still written.
        Stopping a finished task does nothing.
        """
        if self.is_finished:
            return
        self._stop_requested = True
        if self.status == "pending":
            await self._update_status("stopped")
        elif self._trainer is not None:
            self._trainer.stop()
            await self.wait()
        elif self._run_task is not None:
            self._run_task.cancel()
            try:
                await self._run_task
            except asyncio.CancelledError:
                pass
            await self._update_status("stopped")
        await self.emit(create_task_event(EventType.TASK_STOPPED, self.task_id, status=self.status))

    async def wait(self) -> None:
        """Wait until the background run has finished."""
        if self._run_task is not None and not self._run_task.done():
            try:
                await asyncio.shield(self._run_task)
            except asyncio.CancelledError:
                if not self._run_task.cancelled():
                    raise

    def _attach(self, trainer: Trainer) -> None:
        self._trainer = trainer
        trainer.add_subscriber(self._forward_trainer_event)

    async def _forward_trainer_event(self, event: Event) -> None:
        if event.event_type == EventType.EPOCH_COMPLETED:
            self.progress = dict(event.data)
        await self.emit(event)

    async def _run_training(self) -> None:
        try:
            outcome = await run_experiment(self.config, splits=self._splits, on_trainer=self._attach)
        except asyncio.CancelledError:
            raise
        except Exception as e:
            self.error = str(e)
            logger.error(f"Task {self.task_id} failed: {e}", exc_info=True)
            await self._update_status("failed")
            return
        finally:
            self._trainer = None

        self.outcome = outcome
        self.result = {
            **outcome.training.summary(),
            **outcome.metrics(),
            "checkpoint_path": str(outcome.checkpoint_path),
            "start_time": self._start_time,
            "end_time": time.time(),
        }
        logger.info(f"Task {self.task_id} finished with test MSLE {outcome.test.msle:.4f}")
        await self._update_status("stopped" if self._stop_requested else "completed")

    def to_dict(self) -> Dict[str, Any]:
        """Task state as JSON-compatible data."""
        return {
            "task_id": self.task_id,
            "name": self.config.name,
            "variant": self.config.model.variant,
            "status": self.status,
            "config": self.config.model_dump(mode="json"),
            "progress": self.progress,
            "result": self.result,
            "error": self.error,
        }
