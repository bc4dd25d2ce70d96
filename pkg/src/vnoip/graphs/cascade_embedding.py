"""Structural node embeddings from heat-kernel wavelets of the cascade graph."""
import logging
from typing import Optional, Sequence

import networkx as nx
import numpy as np
from scipy import linalg

from ..utils.errors import EmptyGraphError
from .graph_schemas import EmbeddingTable, check_cascade_layout

logger = logging.getLogger(__name__)

DEFAULT_SCALES = (0.5, 1.0)
DEFAULT_T_MAX = 10.0


def heat_wavelets(eigenvalues: np.ndarray, eigenvectors: np.ndarray, scale: float) -> np.ndarray:
    """Matrix whose column ``a`` is the heat-kernel wavelet centered on node ``a``."""
    return (eigenvectors * np.exp(-scale * eigenvalues)[None, :]) @ eigenvectors.T


def sample_points(n_samples: int, t_max: float = DEFAULT_T_MAX) -> np.ndarray:
    """Evenly spaced characteristic-function arguments in (0, t_max]."""
    return t_max * np.arange(1, n_samples + 1) / n_samples


def embed_cascade(graph: nx.Graph, d: int = 40, scales: Sequence[float] = DEFAULT_SCALES,
                  t_max: float = DEFAULT_T_MAX, nodelist: Optional[Sequence[int]] = None) -> EmbeddingTable:
    """Empirical characteristic functions of each node's heat-kernel wavelet.

    Edge direction is ignored. For every scale the row holds the real parts at
    all sample points followed by the imaginary parts.

    Args:
        graph: Cascade graph
        d: Embedding dimension, a multiple of ``2 * len(scales)``
        scales: Heat-kernel scales
        t_max: Largest sample point
        nodelist: Row order; the graph's node order when omitted

    Returns:
        EmbeddingTable: One row per node in ``nodelist`` order

    Raises:
        EmbeddingConfigError: If ``d`` does not split evenly over the scales
        EmptyGraphError: If the graph has no nodes
    """
    n_samples = check_cascade_layout(d, scales)
    nodes = list(graph.nodes) if nodelist is None else list(nodelist)
    if not nodes:
        raise EmptyGraphError("cannot embed an empty cascade graph")

    undirected = nx.Graph(graph.to_undirected() if graph.is_directed() else graph)
    undirected.remove_edges_from(list(nx.selfloop_edges(undirected)))
    laplacian = nx.laplacian_matrix(undirected, nodelist=nodes).toarray().astype(np.float64)
    eigenvalues, eigenvectors = linalg.eigh(laplacian)
    points = sample_points(n_samples, t_max)

    blocks = []
    for scale in scales:
        wavelets = heat_wavelets(eigenvalues, eigenvectors, scale)
        phase = wavelets[:, :, None] * points[None, None, :]
        blocks.append(np.cos(phase).mean(axis=0))
        blocks.append(np.sin(phase).mean(axis=0))
    logger.debug(f"Cascade embedding: {len(nodes)} nodes, {len(scales)} scales, {n_samples} samples")
    return EmbeddingTable(np.hstack(blocks))
