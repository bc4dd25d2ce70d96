"""FastAPI application serving the run queue."""
import logging
from contextlib import asynccontextmanager
from typing import AsyncIterator, Optional

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from ..queue import RunQueue
from .dependencies import get_run_queue, get_websocket_manager
from .router import router as api_router
from .websocket_manager import WebSocketManager

logger = logging.getLogger(__name__)


def create_app(run_queue: Optional[RunQueue] = None, start_queue: bool = True) -> FastAPI:
    """Create and configure the FastAPI application.

    Args:
        run_queue: Queue to serve; the process-wide queue by default
        start_queue: Start processing when the app starts up
    """
    queue = run_queue or get_run_queue()
    manager = WebSocketManager() if run_queue is not None else get_websocket_manager()
    manager.initialize_queue(queue)

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        if start_queue:
            await queue.start_processing()
        yield
        await queue.stop_processing()

    app = FastAPI(title="VNOIP API", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.include_router(api_router, prefix="/api/v1")
    app.dependency_overrides[get_run_queue] = lambda: queue
    app.dependency_overrides[get_websocket_manager] = lambda: manager
    return app


def serve(host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the service with uvicorn until interrupted."""
    logger.info(f"Serving on http://{host}:{port}/api/v1")
    uvicorn.run(create_app(), host=host, port=port)
