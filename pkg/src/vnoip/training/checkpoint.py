"""Binary checkpoint files.

Layout, little-endian throughout::

    magic      8 bytes  b"VNOIPCKP"
    version    uint32
    meta_len   uint32, followed by meta_len bytes of UTF-8 JSON metadata
    n_entries  uint32
    per entry: name_len uint16, name (UTF-8), ndim uint8, ndim x uint64 dims,
               prod(dims) x float64 values in row-major order
"""
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

import numpy as np

from ..utils.errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = b"VNOIPCKP"
VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    """Parameter values plus training metadata (epoch, best validation MSLE, config hash)."""
    params: Dict[str, np.ndarray]
    metadata: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    meta = json.dumps(checkpoint.metadata, sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<II", VERSION, len(meta)), meta, struct.pack("<I", len(checkpoint.params))]
    for name, value in checkpoint.params.items():
        encoded = name.encode("utf-8")
        array = np.ascontiguousarray(value, dtype="<f8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack(f"<B{array.ndim}Q", array.ndim, *array.shape))
        chunks.append(array.tobytes(order="C"))
    Path(path).write_bytes(b"".join(chunks))
    logger.info(f"Wrote checkpoint with {len(checkpoint.params)} entries to {path}")


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointError(f"checkpoint truncated at byte {self.offset}")
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        CheckpointError: On a bad magic, unknown version, truncation or trailing bytes
    """
    reader = _Reader(Path(path).read_bytes())
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointError(f"{path} is not a vnoip checkpoint")
    version, meta_len = reader.unpack("<II")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        metadata = json.loads(reader.take(meta_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt checkpoint metadata: {e}") from e

    (n_entries,) = reader.unpack("<I")
    params: Dict[str, np.ndarray] = {}
    for _ in range(n_entries):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}Q")
        count = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(reader.take(8 * count), dtype="<f8").astype(np.float64)
        if name in params:
            raise CheckpointError(f"duplicate checkpoint entry {name!r}")
        params[name] = values.reshape(shape)
    if reader.offset != len(reader.payload):
        raise CheckpointError(f"{len(reader.payload) - reader.offset} trailing bytes in checkpoint")
    logger.debug(f"Read checkpoint with {len(params)} entries from {path}")
    return Checkpoint(params=params, metadata=metadata)


def entries_equal(a: Mapping[str, np.ndarray], b: Mapping[str, np.ndarray]) -> bool:
    return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)
