"""FastAPI dependencies: process-wide run queue and websocket manager."""
from typing import Optional

from ..queue import RunQueue
from .websocket_manager import WebSocketManager

_run_queue: Optional[RunQueue] = None
_websocket_manager: Optional[WebSocketManager] = None


def get_run_queue() -> RunQueue:
    """Get or create the RunQueue singleton."""
    global _run_queue
    if _run_queue is None:
        _run_queue = RunQueue()
    return _run_queue


def get_websocket_manager() -> WebSocketManager:
    """Get or create the WebSocketManager singleton, subscribed to the run queue."""
    global _websocket_manager
    if _websocket_manager is None:
        _websocket_manager = WebSocketManager()
        _websocket_manager.initialize_queue(get_run_queue())
    return _websocket_manager
