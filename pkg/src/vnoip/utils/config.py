"""Config files (``key = value``), command-line overrides and the data directory."""
import logging
import os
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Type, TypeVar, Union, get_args, get_origin

from pydantic import BaseModel, ValidationError

from .errors import ConfigError, ParseError

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "VNOIP_DATA_DIR"
DEFAULT_DATA_DIR = "data"

ModelT = TypeVar("ModelT", bound=BaseModel)


def data_dir() -> Path:
    """Default data directory, taken from ``VNOIP_DATA_DIR`` when set."""
    return Path(os.environ.get(DATA_DIR_ENV, DEFAULT_DATA_DIR))


def _coerce(raw: str) -> str:
    """Strip a raw string; pydantic's lax coercion handles numbers and flags."""
    return raw.strip()


def _is_sequence(annotation: Any) -> bool:
    origin = get_origin(annotation)
    if origin is Union:
        return any(_is_sequence(arg) for arg in get_args(annotation))
    return origin in (list, tuple, Sequence)


def _split_lists(model: Type[BaseModel], values: Mapping[str, Any]) -> Dict[str, Any]:
    """Split comma-separated strings for list and tuple fields of ``model`` only."""
    split = {}
    for key, value in values.items():
        field = model.model_fields.get(key)
        if isinstance(value, str) and field is not None and _is_sequence(field.annotation):
            value = [item.strip() for item in value.split(",") if item.strip()]
        split[key] = value
    return split


def read_config_file(path: Path) -> Dict[str, Any]:
    """Read a ``key = value`` config file.

    Args:
        path: File to read; ``#`` starts a comment, blank lines are skipped

    Returns:
        Dict[str, Any]: Raw key/value pairs

    Raises:
        ParseError: If a non-blank line has no ``=``
    """
    values: Dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            if "=" not in content:
                raise ParseError(f"expected 'key = value', got {content!r}", line_number)
            key, value = content.split("=", 1)
            values[key.strip().replace("-", "_")] = _coerce(value)
    logger.debug(f"Read {len(values)} config entries from {path}")
    return values


def merge_settings(file_values: Mapping[str, Any], flag_values: Mapping[str, Any]) -> Dict[str, Any]:
    """Overlay command-line values on file values; ``None`` flags are unset."""
    merged = dict(file_values)
    for key, value in flag_values.items():
        if value is not None:
            merged[key] = _coerce(value) if isinstance(value, str) else value
    return merged


def build_config(model: Type[ModelT], values: Mapping[str, Any],
                 known_elsewhere: Iterable[str] = ()) -> ModelT:
    """Validate settings into a pydantic model.

    Args:
        model: Config model class
        values: Merged settings; keys not belonging to ``model`` are ignored
            when listed in ``known_elsewhere``
        known_elsewhere: Keys consumed by another config object

    Raises:
        ConfigError: On unknown keys or validation failure
    """
    fields = set(model.model_fields)
    skip = set(known_elsewhere)
    unknown = [key for key in values if key not in fields and key not in skip]
    if unknown:
        raise ConfigError(f"unknown {model.__name__} keys: {', '.join(sorted(unknown))}")
    try:
        return model(**_split_lists(model, {key: value for key, value in values.items() if key in fields}))
    except ValidationError as e:
        raise ConfigError(f"invalid {model.__name__}: {e}") from e


def load_config(model: Type[ModelT], path: Optional[Path] = None,
                overrides: Optional[Mapping[str, Any]] = None) -> ModelT:
    """Read an optional config file, apply overrides and validate."""
    file_values = read_config_file(path) if path is not None else {}
    return build_config(model, merge_settings(file_values, overrides or {}))
