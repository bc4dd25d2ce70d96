"""WebSocket fan-out of run-queue events.

Every event the queue emits (its own, its tasks' and their trainers') is
wrapped in the API envelope and sent to each connected client. The last
``buffer_size`` events are replayed to clients that connect later.
"""
import logging
from typing import Any, Dict, List, Optional

from fastapi import WebSocket

from ..queue import RunQueue
from ..utils.events import Event, EventType, create_api_response

logger = logging.getLogger(__name__)


class WebSocketManager:
    """Manages WebSocket connections and event broadcasting."""

    def __init__(self, buffer_size: int = 100):
        self._connections: Dict[str, WebSocket] = {}
        self._run_queue: Optional[RunQueue] = None
        self._event_buffer: List[Dict[str, Any]] = []
        self._buffer_size = buffer_size

    @property
    def connection_count(self) -> int:
        return len(self._connections)

    def initialize_queue(self, run_queue: RunQueue) -> None:
        """Subscribe to a run queue, replacing any previous one."""
        if self._run_queue is not None:
            self._run_queue.remove_subscriber(self._handle_queue_event)
        self._run_queue = run_queue
        run_queue.add_subscriber(self._handle_queue_event)
        logger.info("WebSocket manager initialized with run queue")

    async def connect(self, websocket: WebSocket, client_id: str) -> None:
        """Register an accepted connection and replay buffered events.

        Args:
            websocket: The accepted WebSocket connection
            client_id: Unique identifier for the client; an older connection
                with the same ID is closed
        """
        old = self._connections.pop(client_id, None)
        if old is not None:
            logger.warning(f"Client {client_id} already connected, closing old connection")
            try:
                await old.close()
            except Exception as e:
                logger.error(f"Error closing old connection for client {client_id}: {e}")
        self._connections[client_id] = websocket
        logger.info(f"Client {client_id} connected. Total connections: {len(self._connections)}")
        for event_data in self._event_buffer:
            await self._send(client_id, websocket, create_api_response(status="success", data=event_data))

    def disconnect(self, websocket: WebSocket, client_id: str) -> None:
        """Forget a connection if it is still the registered one for ``client_id``."""
        if self._connections.get(client_id) is websocket:
            del self._connections[client_id]
            logger.info(f"Client {client_id} disconnected. Remaining connections: {len(self._connections)}")

    async def broadcast(self, payload: Dict[str, Any]) -> None:
        """Send a payload to every connected client."""
        for client_id, websocket in list(self._connections.items()):
            await self._send(client_id, websocket, payload)

    async def _send(self, client_id: str, websocket: WebSocket, payload: Dict[str, Any]) -> None:
        try:
            await websocket.send_json(payload)
        except Exception as e:
            logger.error(f"Error sending to client {client_id}: {e}")

    async def _handle_queue_event(self, event: Event) -> None:
        if event.event_type == EventType.BATCH_COMPLETED:
            # Batch events reach live clients only.
            await self.broadcast(create_api_response(status="success", data=event.to_dict()))
            return
        event_data = event.to_dict()
        self._event_buffer.append(event_data)
        if len(self._event_buffer) > self._buffer_size:
            self._event_buffer.pop(0)
        await self.broadcast(create_api_response(status="success", data=event_data))

    async def handle_client_message(self, websocket: WebSocket, message_type: str, data: Dict[str, Any]) -> None:
        """Answer a validated client message."""
        if self._run_queue is None:
            await websocket.send_json(create_api_response(
                status="error", error={"message": "Run queue not initialized"},
            ))
            return
        if message_type == "REQUEST_STATE":
            tasks = await self._run_queue.list_tasks()
            await websocket.send_json(create_api_response(
                status="success", data={"type": "STATE_UPDATE", "tasks": tasks, "queue": self._run_queue.status()},
            ))
        elif message_type == "STOP_RUN":
            task_id = data.get("task_id")
            if not task_id or not await self._run_queue.stop_task(task_id):
                await websocket.send_json(create_api_response(
                    status="error", error={"message": f"Run {task_id} not found"},
                ))
                return
            await websocket.send_json(create_api_response(
                status="success", data={"type": "RUN_STOPPED", "task_id": task_id},
            ))
