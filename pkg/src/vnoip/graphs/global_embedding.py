"""Global-graph embedding by factorizing a shifted PPMI matrix of random-walk co-occurrences.

Deterministic small-graph counterpart of sparsified matrix-factorization
network embedding: the r-step transition matrices are averaged exactly
instead of being sampled.
"""
import logging

import numpy as np
from scipy import linalg

from ..utils.errors import EmptyGraphError, RankError
from .graph_schemas import EmbeddingTable, GlobalGraph

logger = logging.getLogger(__name__)

# Singular values below this fraction of the largest are treated as zero.
RANK_CUTOFF = 1e-10


def ppmi_matrix(graph: GlobalGraph, window: int = 10, negative: float = 1.0) -> np.ndarray:
    """Shifted PPMI matrix log(max(1, vol * M_ij / (negative * deg_j))).

    ``M`` is the average of the r-step transition matrices for r = 1..window.
    Rows and columns of isolated nodes are zero.
    """
    n = graph.n_nodes
    adjacency = graph.adjacency().toarray()
    degree = adjacency.sum(axis=1)
    volume = degree.sum()
    if volume == 0.0:
        return np.zeros((n, n))

    connected = degree > 0
    inv_degree = np.divide(1.0, degree, out=np.zeros(n), where=connected)
    transition = inv_degree[:, None] * adjacency

    walk = np.eye(n)
    average = np.zeros((n, n))
    for _ in range(window):
        walk = walk @ transition
        average += walk
    average /= window

    ratio = np.zeros((n, n))
    np.divide(volume * average, negative * degree[None, :], out=ratio, where=connected[None, :])
    ppmi = np.log(np.maximum(ratio, 1.0))
    ppmi[~connected, :] = 0.0
    ppmi[:, ~connected] = 0.0
    # deg_i * M_ij is symmetric, so is the matrix; remove round-off asymmetry
    return 0.5 * (ppmi + ppmi.T)


def embed_global(graph: GlobalGraph, d: int = 40, window: int = 10, negative: float = 1.0) -> EmbeddingTable:
    """Rank-d factorization of the shifted PPMI matrix.

    Rows are ``X V_d / sqrt(sigma_d)`` which equals ``U_d sqrt(sigma_d)`` for
    the retained singular triplets, but maps identical PPMI rows to identical
    embedding rows regardless of how degenerate singular vectors are chosen.

    Args:
        graph: Global user graph
        d: Embedding dimension
        window: Random-walk window
        negative: Negative-sampling shift

    Returns:
        EmbeddingTable: ``n_nodes x d`` table

    Raises:
        EmptyGraphError: If the graph has no nodes
        RankError: If ``d`` exceeds the node count
    """
    n = graph.n_nodes
    if n == 0:
        raise EmptyGraphError("cannot embed an empty graph")
    if d > n:
        raise RankError(f"embedding rank {d} exceeds node count {n}")

    ppmi = ppmi_matrix(graph, window=window, negative=negative)
    _, sigma, vt = linalg.svd(ppmi)
    sigma = sigma[:d]
    basis = vt[:d].T
    keep = sigma > RANK_CUTOFF * sigma[0]
    scale = np.divide(1.0, np.sqrt(sigma), out=np.zeros_like(sigma), where=keep)
    embedding = (ppmi @ basis) * scale[None, :]
    logger.info(f"Global embedding: {n} nodes, {graph.n_edges} edges, rank {int(keep.sum())}/{d}")
    return EmbeddingTable(embedding)
