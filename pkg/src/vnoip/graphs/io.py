"""Edge-list files and the binary embedding cache."""
import logging
import struct
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from ..utils.errors import EmbeddingCacheError, ParseError
from .graph_schemas import Edge, EmbeddingTable, GlobalGraph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NODE_COUNT_HEADER = "# n_nodes"
EMBEDDING_MAGIC = b"VNOIPEMB"
EMBEDDING_VERSION = 1
_EMBEDDING_HEADER = struct.Struct("<8sIQQ")


def read_edge_list(path: PathLike, n_nodes: Optional[int] = None) -> GlobalGraph:
    """Read ``u<TAB>v`` lines into a :class:`GlobalGraph`.

    The node count comes from ``n_nodes``, else from a ``# n_nodes<TAB>N``
    header, else from the largest id. Other ``#`` lines are comments.

    Raises:
        ParseError: On a malformed line, with its line number
    """
    edges: List[Edge] = []
    header_nodes: Optional[int] = None
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            content = line.strip()
            if not content:
                continue
            if content.startswith("#"):
                if content.startswith(NODE_COUNT_HEADER):
                    try:
                        header_nodes = int(content[len(NODE_COUNT_HEADER):].strip())
                    except ValueError as e:
                        raise ParseError(f"bad node-count header {content!r}", line_number) from e
                continue
            parts = content.split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected 'u<TAB>v', got {content!r}", line_number)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as e:
                raise ParseError(f"non-integer node id in {content!r}", line_number) from e
            if u < 0 or v < 0:
                raise ParseError(f"negative node id in {content!r}", line_number)
            edges.append((u, v))

    largest = max((max(u, v) for u, v in edges), default=-1) + 1
    count = n_nodes if n_nodes is not None else (header_nodes if header_nodes is not None else largest)
    if count < largest:
        raise ParseError(f"node count {count} smaller than largest id {largest - 1}")
    graph = GlobalGraph(count, edges)
    logger.info(f"Read {graph} from {path}")
    return graph


def write_edge_list(graph: GlobalGraph, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{NODE_COUNT_HEADER}\t{graph.n_nodes}\n")
        for u, v in graph.edges:
            f.write(f"{u}\t{v}\n")
    logger.info(f"Wrote {graph} to {path}")


def save_embeddings(table: EmbeddingTable, path: PathLike) -> None:
    """Write ``magic, version, N, d`` then row-major little-endian doubles."""
    header = _EMBEDDING_HEADER.pack(EMBEDDING_MAGIC, EMBEDDING_VERSION, table.n_nodes, table.dim)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(table.matrix, dtype="<f8").tobytes())
    logger.info(f"Saved {table.n_nodes}x{table.dim} embeddings to {path}")


def load_embeddings(path: PathLike) -> EmbeddingTable:
    """Read a table written by :func:`save_embeddings`.

    Raises:
        EmbeddingCacheError: On a bad magic number, unknown version or truncated body
    """
    payload = Path(path).read_bytes()
    if len(payload) < _EMBEDDING_HEADER.size:
        raise EmbeddingCacheError(f"{path}: file too short for an embedding header")
    magic, version, n_nodes, dim = _EMBEDDING_HEADER.unpack_from(payload)
    if magic != EMBEDDING_MAGIC:
        raise EmbeddingCacheError(f"{path}: not an embedding cache")
    if version != EMBEDDING_VERSION:
        raise EmbeddingCacheError(f"{path}: unsupported version {version}")
    body = payload[_EMBEDDING_HEADER.size:]
    if len(body) != 8 * n_nodes * dim:
        raise EmbeddingCacheError(f"{path}: expected {n_nodes}x{dim} doubles, got {len(body)} bytes")
    matrix = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(n_nodes, dim)
    return EmbeddingTable(matrix)
