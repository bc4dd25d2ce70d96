"""Turn cascades into :class:`CascadeSample` records."""
import logging
from functools import partial
from multiprocessing import Pool
from typing import List, Optional, Sequence

import networkx as nx
import numpy as np

from ..graphs.cascade_embedding import embed_cascade
from ..graphs.graph_schemas import EmbeddingConfig, EmbeddingTable
from ..utils.errors import HorizonError
from .data_schemas import Cascade, ProtocolConfig
from .sample import CascadeSample

logger = logging.getLogger(__name__)

MAX_SEQUENCE = 100


def cascade_graph(cascade: Cascade) -> nx.Graph:
    """Undirected graph over the cascade's users with one edge per repost."""
    graph = nx.Graph()
    graph.add_nodes_from(cascade.participants())
    graph.add_edges_from((e.parent, e.child) for e in cascade.events if e.parent != e.child)
    return graph


def grid_times(t_o: float, t_p: float, n_grid: int) -> np.ndarray:
    """Raw future grid t_o + k (t_p - t_o) / T for k = 1..T."""
    return t_o + (t_p - t_o) * np.arange(1, n_grid + 1) / n_grid


def build_sample(cascade: Cascade, global_table: EmbeddingTable, t_o: float, t_p: float,
                 n_grid: int = 8, embedding: Optional[EmbeddingConfig] = None,
                 max_sequence: int = MAX_SEQUENCE) -> CascadeSample:
    """Featurize one cascade for observation window ``t_o`` and horizon ``t_p``.

    Times are divided by ``t_p`` (publication is time 0). The sequence holds
    the root and the reposts at or before ``t_o``, cut to ``max_sequence``
    positions. The cascade embedding is computed on the retained prefix.

    Args:
        cascade: Full cascade; only the labels read beyond ``t_o``
        global_table: Global-graph embeddings; unknown users get zero rows
        t_o: Observation time, relative to publication
        t_p: Prediction horizon, relative to publication
        n_grid: Number of future grid points T
        embedding: Cascade-embedding settings
        max_sequence: Positions kept, root included

    Returns:
        CascadeSample: Featurized sample

    Raises:
        HorizonError: If ``t_p <= t_o``
    """
    if t_p <= t_o:
        raise HorizonError(f"prediction time {t_p} must exceed observation time {t_o}")
    embedding = embedding or EmbeddingConfig()

    prefix = cascade.observed(t_o)
    kept = prefix.events[:max_sequence - 1]
    truncated = Cascade(cascade.cascade_id, cascade.root, cascade.publish_time, kept)

    users = (cascade.root,) + tuple(e.child for e in kept)
    times = np.concatenate([[0.0], [e.time for e in kept]]) / t_p

    graph = cascade_graph(truncated)
    nodes = truncated.participants()
    table = embed_cascade(graph, d=embedding.dim, scales=embedding.scales, t_max=embedding.t_max,
                          nodelist=nodes)
    row_of = {user: i for i, user in enumerate(nodes)}
    cascade_rows = table.matrix[[row_of[u] for u in users]]

    raw_grid = grid_times(t_o, t_p, n_grid)
    grid_popularity = np.array([cascade.popularity_at(t) for t in raw_grid], dtype=np.float64)
    observed_popularity = float(cascade.popularity_at(t_o))

    return CascadeSample(
        cascade_id=cascade.cascade_id,
        users=users,
        times=times,
        global_rows=global_table.rows(list(users)),
        cascade_rows=cascade_rows,
        context_popularity=np.arange(1, len(users) + 1, dtype=np.float64),
        observation_time=t_o / t_p,
        observed_popularity=observed_popularity,
        grid_times=raw_grid / t_p,
        grid_popularity_values=grid_popularity,
        label_value=float(grid_popularity[-1] - observed_popularity),
        observed_times=np.concatenate([[0.0], [e.time for e in prefix.events]]) / t_p,
    )


def featurize_all(cascades: Sequence[Cascade], global_table: EmbeddingTable, protocol: ProtocolConfig,
                  embedding: Optional[EmbeddingConfig] = None, workers: int = 1) -> List[CascadeSample]:
    """Featurize cascades in input order, optionally with a process pool."""
    build = partial(build_sample, global_table=global_table, t_o=protocol.observation_time,
                    t_p=protocol.prediction_time, n_grid=protocol.n_grid,
                    embedding=embedding or EmbeddingConfig(), max_sequence=protocol.max_sequence)
    if workers > 1 and len(cascades) > 1:
        with Pool(processes=workers) as pool:
            samples = pool.map(build, cascades)
    else:
        samples = [build(c) for c in cascades]
    logger.info(f"Featurized {len(samples)} cascades")
    return samples
