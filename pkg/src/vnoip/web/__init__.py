"""HTTP and websocket service over the run queue."""
from .app import create_app, serve

__all__ = ["create_app", "serve"]
