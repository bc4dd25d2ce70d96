"""Graph and embedding types shared by the embedding providers."""
import logging
from dataclasses import dataclass
from typing import Any, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import sparse

from ..utils.errors import DataError, EmbeddingConfigError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class GlobalGraph:
    """Undirected user graph with node ids in ``[0, n_nodes)``.

    Self-loops are dropped and duplicate edges (in either direction) are
    merged on construction.
    """

    def __init__(self, n_nodes: int, edges: Iterable[Edge]):
        if n_nodes < 0:
            raise DataError(f"node count must be non-negative, got {n_nodes}")
        graph = nx.Graph()
        graph.add_nodes_from(range(n_nodes))
        dropped = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise DataError(f"edge ({u}, {v}) outside node range [0, {n_nodes})")
            if u == v:
                dropped += 1
                continue
            graph.add_edge(u, v)
        if dropped:
            logger.debug(f"Dropped {dropped} self-loops")
        self._graph = graph

    @property
    def n_nodes(self) -> int:
        return self._graph.number_of_nodes()

    @property
    def n_edges(self) -> int:
        return self._graph.number_of_edges()

    @property
    def graph(self) -> nx.Graph:
        return self._graph

    @property
    def edges(self) -> List[Edge]:
        """Edges as sorted ``(min, max)`` pairs, in sorted order."""
        return sorted((min(u, v), max(u, v)) for u, v in self._graph.edges())

    def neighbors(self, node: int) -> List[int]:
        return sorted(self._graph.neighbors(node))

    def degrees(self) -> np.ndarray:
        return np.array([self._graph.degree(u) for u in range(self.n_nodes)], dtype=np.float64)

    def adjacency(self) -> sparse.csr_array:
        return nx.to_scipy_sparse_array(self._graph, nodelist=range(self.n_nodes), dtype=np.float64, format="csr")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GlobalGraph) and self.n_nodes == other.n_nodes and self.edges == other.edges

    def __repr__(self) -> str:
        return f"GlobalGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class EmbeddingTable:
    """Row-per-node embedding matrix."""
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise DataError(f"embedding table must be 2-D, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise DataError("embedding table contains non-finite values")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def rows(self, nodes: Sequence[int]) -> np.ndarray:
        """Rows for ``nodes``; ids outside the table get zero rows."""
        out = np.zeros((len(nodes), self.dim))
        missing = 0
        for i, node in enumerate(nodes):
            if 0 <= node < self.n_nodes:
                out[i] = self.matrix[node]
            else:
                missing += 1
        if missing:
            logger.warning(f"{missing} of {len(nodes)} users are absent from the embedding table")
        return out


class EmbeddingConfig(BaseModel):
    """Settings of the global and cascade embedding providers."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    dim: int = Field(40, description="Embedding dimension of both providers")
    window: int = Field(10, description="Random-walk window of the global embedding")
    negative: float = Field(1.0, description="Negative-sampling shift of the global embedding")
    scales: Tuple[float, ...] = Field((0.5, 1.0), description="Heat-kernel scales of the cascade embedding")
    t_max: float = Field(10.0, description="Largest characteristic-function sample point")

    @field_validator("dim", "window")
    def must_be_positive(cls, v: int) -> int:
        """Validate positive integer settings."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("negative", "t_max")
    def must_be_positive_float(cls, v: float) -> float:
        """Validate positive real settings."""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("scales", mode="before")
    def single_scale_as_tuple(cls, v: Any) -> Any:
        """Accept one scale given as a bare value, as config files and flags do."""
        if isinstance(v, (str, int, float)):
            return (v,)
        return v

    @field_validator("scales")
    def scales_must_be_valid(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        """Validate that at least one non-negative scale is given."""
        if not v:
            raise ValueError("at least one scale is required")
        if any(s < 0 for s in v):
            raise ValueError("scales must be non-negative")
        return v

    @model_validator(mode="after")
    def dim_matches_sampling(self) -> "EmbeddingConfig":
        """Validate that the dimension splits into (real, imaginary) blocks per scale."""
        check_cascade_layout(self.dim, self.scales)
        return self


def check_cascade_layout(dim: int, scales: Sequence[float]) -> int:
    """Number of characteristic-function samples per scale.

    Raises:
        EmbeddingConfigError: If ``dim`` is not a multiple of ``2 * len(scales)``
    """
    blocks = 2 * len(scales)
    if blocks == 0 or dim % blocks != 0:
        raise EmbeddingConfigError(f"dimension {dim} is not divisible by 2 x {len(scales)} scales")
    return dim // blocks
