"""Sequential queue of training runs."""
import asyncio
import logging
import uuid
from collections import Counter
from typing import Any, Dict, List, Mapping, Optional, Union

from ..training.pipeline import Splits
from ..training.training_schemas import RunConfig
from ..utils.events import Event, EventEmitter, EventType, create_queue_event, create_task_event
from .task import TrainingTask

logger = logging.getLogger(__name__)


class RunQueue(EventEmitter):
    """Trains queued runs one at a time, in the order they were added.

    Every event of every task (and of the trainer inside it) is re-emitted
    by the queue, so one subscriber on the queue sees everything.

    Args:
        poll_interval: Seconds between checks for new work while idle or paused
    """

    def __init__(self, poll_interval: float = 0.1):
        super().__init__()
        self.poll_interval = poll_interval
        self._tasks: Dict[str, TrainingTask] = {}
        self._worker: Optional[asyncio.Task] = None
        self._paused = False
        self._current_task: Optional[str] = None

    @property
    def is_processing(self) -> bool:
        return self._worker is not None

    @property
    def is_paused(self) -> bool:
        return self._paused

    @property
    def current_task(self) -> Optional[str]:
        return self._current_task

    async def add_task(self, config: Union[RunConfig, Mapping[str, Any]], task_id: Optional[str] = None,
                       splits: Optional[Splits] = None) -> str:
        """Queue a run.

        Args:
            config: Run settings, validated here when given as a mapping
            task_id: Task ID; a UUID is generated when omitted
            splits: Featurized splits to train on instead of reading the corpus,
                so several variants can share one featurization

        Returns:
            str: ID of the queued task

        Raises:
            ValueError: If the task ID is already queued
            ConfigError: If ``config`` does not validate
        """
        task_id = task_id or uuid.uuid4().hex
        if task_id in self._tasks:
            raise ValueError(f"Task {task_id} already exists in queue")
        task = TrainingTask(task_id=task_id, config=config, splits=splits)
        task.add_subscriber(self._relay)
        self._tasks[task_id] = task
        logger.info(f"Queued run '{task.config.name}' ({task.config.model.variant}) as task {task_id}")
        await self.emit(create_task_event(EventType.TASK_ADDED, task_id, status=task.status, name=task.config.name))
        return task_id

    def task(self, task_id: str) -> Optional[TrainingTask]:
        return self._tasks.get(task_id)

    async def get_task(self, task_id: str) -> Optional[Dict[str, Any]]:
        task = self._tasks.get(task_id)
        return task.to_dict() if task is not None else None

    async def list_tasks(self) -> List[Dict[str, Any]]:
        """States of all tasks in insertion order."""
        return [task.to_dict() for task in self._tasks.values()]

    def status(self) -> Dict[str, Any]:
        return {
            "is_processing": self.is_processing,
            "is_paused": self.is_paused,
            "current_task": self._current_task,
            "task_counts": dict(Counter(task.status for task in self._tasks.values())),
        }

    async def start_processing(self) -> None:
        if self.is_processing:
            logger.warning("Run queue is already processing")
            return
        logger.info("Run queue started")
        self._paused = False
        self._worker = asyncio.create_task(self._work())

    async def stop_processing(self) -> None:
        """Stop the worker.

        A run in progress is stopped (its best parameters are still written)
        and pending runs stay queued for the next start.
        """
        if not self.is_processing:
            return
        logger.info("Stopping run queue")
        worker, self._worker = self._worker, None
        if self._current_task is not None:
            await self._tasks[self._current_task].stop()
        worker.cancel()
        try:
            await worker
        except asyncio.CancelledError:
            pass
        self._paused = False

    async def pause_processing(self) -> None:
        """Hold back further runs; the one in progress continues."""
        if not self.is_processing or self._paused:
            return
        self._paused = True
        logger.info("Run queue paused")
        await self.emit(create_queue_event(EventType.QUEUE_PAUSED, status="paused"))

    async def resume_processing(self) -> None:
        if not self.is_processing or not self._paused:
            return
        self._paused = False
        logger.info("Run queue resumed")
        await self.emit(create_queue_event(EventType.QUEUE_RESUMED, status="running"))

    async def join(self) -> None:
        """Wait until no task is pending or running."""
        while not all(task.is_finished for task in self._tasks.values()):
            await asyncio.sleep(self.poll_interval)

    def _next_pending(self) -> Optional[TrainingTask]:
        if self._paused or self._worker is None:
            return None
        return next((task for task in self._tasks.values() if task.status == "pending"), None)

    async def _work(self) -> None:
        await self.emit(create_queue_event(EventType.QUEUE_STARTED, status="running"))
        try:
            while True:
                task = self._next_pending()
                if task is None:
                    await asyncio.sleep(self.poll_interval)
                    continue
                self._current_task = task.task_id
                try:
                    await self._run(task)
                finally:
                    self._current_task = None
        finally:
            logger.info("Run queue stopped")
            await self.emit(create_queue_event(EventType.QUEUE_STOPPED, status="stopped"))

    async def _run(self, task: TrainingTask) -> None:
        logger.info(f"Training task {task.task_id}")
        try:
            await task.start()
            await task.wait()
        except asyncio.CancelledError:
            raise
        except Exception as e:
            logger.error(f"Task {task.task_id} could not run: {e}")
            await self.emit(create_task_event(EventType.TASK_FAILED, task.task_id, status="failed", error=str(e)))
            return
        if task.status == "completed":
            await self.emit(create_task_event(
                EventType.TASK_COMPLETED, task.task_id, status="completed", result=task.result,
            ))
        elif task.status == "failed":
            await self.emit(create_task_event(EventType.TASK_FAILED, task.task_id, status="failed", error=task.error))

    async def stop_task(self, task_id: str) -> bool:
        """Stop one task.

        Returns:
            bool: False if the task is unknown
        """
        task = self._tasks.get(task_id)
        if task is None:
            logger.warning(f"Task {task_id} not found in queue")
            return False
        await task.stop()
        return True

    async def _relay(self, event: Event) -> None:
        await self.emit(event)
