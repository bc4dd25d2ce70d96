"""Events published by trainers, tasks and the run queue.

Trainers report batches and epochs, tasks report status changes, and the
queue forwards both together with its own lifecycle events. Subscribers are
plain or async callables; the websocket layer and the progress table are the
main consumers.
"""
import asyncio
import logging
import time
from dataclasses import asdict, dataclass, field
from enum import Enum, auto
from typing import Any, Awaitable, Callable, Dict, List, Optional, Union

logger = logging.getLogger(__name__)

QUEUE_TASK_ID = "queue"


class EventType(Enum):
    # Run queue lifecycle
    QUEUE_STARTED = auto()
    QUEUE_STOPPED = auto()
    QUEUE_PAUSED = auto()
    QUEUE_RESUMED = auto()

    # One training run as a task
    TASK_ADDED = auto()
    TASK_STARTED = auto()
    TASK_COMPLETED = auto()
    TASK_FAILED = auto()
    TASK_STOPPED = auto()
    TASK_STATUS_CHANGED = auto()

    # Trainer progress
    BATCH_COMPLETED = auto()
    EPOCH_COMPLETED = auto()
    NEW_BEST_FOUND = auto()
    EARLY_STOPPED = auto()
    TRAINING_COMPLETED = auto()
    TRAINING_ERROR = auto()

    # Free-form notices
    ERROR = auto()
    WARNING = auto()
    INFO = auto()


@dataclass
class Event:
    """One published event; ``data`` must stay JSON-serializable."""
    event_type: EventType
    task_id: Optional[str] = None
    data: Optional[Dict[str, Any]] = None
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.data is None:
            self.data = {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "event_type": self.event_type.name,
            "task_id": self.task_id,
            "timestamp": self.timestamp,
            "data": self.data,
        }


Subscriber = Callable[[Event], Union[None, Awaitable[None]]]


class EventEmitter:
    """Mixin that fans events out to its subscribers in subscription order.

    A subscriber that raises is logged and skipped; the others still run.
    """

    def __init__(self):
        self._subscribers: List[Subscriber] = []

    def add_subscriber(self, callback: Subscriber) -> None:
        self._subscribers.append(callback)

    def remove_subscriber(self, callback: Subscriber) -> None:
        """Detach ``callback``; detaching one that is not attached does nothing."""
        try:
            self._subscribers.remove(callback)
        except ValueError:
            pass

    async def emit(self, event: Event) -> None:
        # Copy so a subscriber may detach itself while being notified.
        for callback in tuple(self._subscribers):
            try:
                outcome = callback(event)
                if asyncio.iscoroutine(outcome):
                    await outcome
            except Exception as e:
                logger.error(f"Subscriber failed on {event.event_type.name}: {e}")


def create_task_event(event_type: EventType, task_id: str, **data) -> Event:
    return Event(event_type, task_id=task_id, data=data)


def create_training_event(event_type: EventType, task_id: Optional[str] = None, **data) -> Event:
    """Trainer progress; ``task_id`` is set when the trainer runs inside a queue task."""
    return Event(event_type, task_id=task_id, data=data)


def create_system_event(event_type: EventType, message: str, **data) -> Event:
    return Event(event_type, data={"message": message, **data})


def create_queue_event(event_type: EventType, **data) -> Event:
    return Event(event_type, task_id=QUEUE_TASK_ID, data=data)


@dataclass
class APIResponse:
    """Envelope of every HTTP and websocket payload."""
    status: str  # "success" or "error"
    data: Optional[Dict[str, Any]] = None
    error: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def create_api_response(status: str = "success", data: Optional[Dict[str, Any]] = None,
                        error: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return APIResponse(status=status, data=data, error=error).to_dict()
