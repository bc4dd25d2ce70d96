"""V1 API router: runs, queue control and the event websocket."""
import logging
import uuid
from typing import Any, Dict, Optional

from fastapi import APIRouter, Depends, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from ..queue import RunQueue
from ..utils.errors import VnoipError
from ..utils.events import create_api_response
from .api_schemas import APIResponse, QueueControl, QueueStatus, RunRequest, WebSocketMessage
from .dependencies import get_run_queue, get_websocket_manager
from .websocket_manager import WebSocketManager

logger = logging.getLogger(__name__)
router = APIRouter()


def error_response(status_code: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status_code,
                        content=create_api_response(status="error", error={"message": message}))


def queue_status(run_queue: RunQueue) -> Dict[str, Any]:
    status = run_queue.status()
    return QueueStatus(
        active_task_id=status["current_task"],
        task_count=sum(status["task_counts"].values()),
        task_counts=status["task_counts"],
        is_processing=status["is_processing"],
        is_paused=status["is_paused"],
    ).model_dump()


@router.get("/health")
async def health_check() -> Dict[str, str]:
    """Health check endpoint."""
    return {"status": "ok"}


@router.post("/runs", response_model=APIResponse)
async def create_run(request: RunRequest, run_queue: RunQueue = Depends(get_run_queue)) -> Any:
    """Queue a training run."""
    try:
        config = request.to_run_config()
        task_id = await run_queue.add_task(config)
    except (VnoipError, ValueError) as e:
        logger.error(f"Rejected run {request.name}: {e}")
        return error_response(400, str(e))
    return create_api_response(status="success", data={"task_id": task_id, "status": "pending"})


@router.get("/runs", response_model=APIResponse)
async def list_runs(run_queue: RunQueue = Depends(get_run_queue)) -> Any:
    tasks = await run_queue.list_tasks()
    return create_api_response(status="success", data={"tasks": tasks})


@router.get("/runs/{task_id}", response_model=APIResponse)
async def get_run(task_id: str, run_queue: RunQueue = Depends(get_run_queue)) -> Any:
    task = await run_queue.get_task(task_id)
    if task is None:
        return error_response(404, f"Run {task_id} not found")
    return create_api_response(status="success", data=task)


@router.post("/runs/{task_id}/stop", response_model=APIResponse)
async def stop_run(task_id: str, run_queue: RunQueue = Depends(get_run_queue)) -> Any:
    """Stop a run; a running trainer keeps its best parameters."""
    if not await run_queue.stop_task(task_id):
        return error_response(404, f"Run {task_id} not found")
    return create_api_response(status="success", data=await run_queue.get_task(task_id))


@router.get("/queue/status", response_model=APIResponse)
async def get_queue_status(run_queue: RunQueue = Depends(get_run_queue)) -> Any:
    return create_api_response(status="success", data=queue_status(run_queue))


@router.post("/queue/control", response_model=APIResponse)
async def control_queue(control: QueueControl, run_queue: RunQueue = Depends(get_run_queue)) -> Any:
    """Control the queue (start/pause/resume/stop)."""
    if control.action == "start":
        await run_queue.start_processing()
    elif control.action == "pause":
        await run_queue.pause_processing()
    elif control.action == "resume":
        await run_queue.resume_processing()
    elif control.action == "stop":
        await run_queue.stop_processing()
    return create_api_response(status="success", data=queue_status(run_queue))


@router.websocket("/ws")
async def websocket_endpoint(
    websocket: WebSocket,
    client_id: Optional[str] = Query(None),
    run_queue: RunQueue = Depends(get_run_queue),
    websocket_manager: WebSocketManager = Depends(get_websocket_manager),
) -> None:
    """Stream queue, task and training events; answer state and stop requests."""
    client_id = client_id or str(uuid.uuid4())
    await websocket.accept()
    await websocket.send_json(create_api_response(
        status="success", data={"type": "CONNECTED", "client_id": client_id},
    ))
    await websocket.send_json(create_api_response(
        status="success", data={"type": "INITIAL_STATE", "tasks": await run_queue.list_tasks()},
    ))
    await websocket_manager.connect(websocket, client_id)
    try:
        while True:
            raw = await websocket.receive_json()
            try:
                message = WebSocketMessage(**raw)
            except (ValidationError, TypeError) as e:
                await websocket.send_json(create_api_response(
                    status="error", error={"message": str(e), "type": "INVALID_MESSAGE"},
                ))
                continue
            await websocket_manager.handle_client_message(websocket, message.type, message.data)
    except WebSocketDisconnect:
        logger.info(f"Client {client_id} disconnected")
    finally:
        websocket_manager.disconnect(websocket, client_id)
