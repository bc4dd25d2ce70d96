"""Events, errors and configuration shared across the package."""
from .config import build_config, data_dir, load_config, merge_settings, read_config_file
from .errors import ConfigError, DataError, NumericError, ParseError, VnoipError
from .events import (
    APIResponse, Event, EventEmitter, EventType,
    create_api_response, create_queue_event, create_system_event, create_task_event, create_training_event,
)

__all__ = [
    "build_config", "data_dir", "load_config", "merge_settings", "read_config_file",
    "ConfigError", "DataError", "NumericError", "ParseError", "VnoipError",
    "APIResponse", "Event", "EventEmitter", "EventType",
    "create_api_response", "create_queue_event", "create_system_event", "create_task_event",
    "create_training_event",
]
