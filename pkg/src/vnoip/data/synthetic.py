"""Synthetic corpora: a preferential-attachment user graph and Hawkes-style cascades.

Cascades are simulated through the cluster representation of a Hawkes
process with exponential kernel: every repost has Poisson(branching)
children, each after an Exp(decay) delay, so the offspring intensity of an
event is branching * decay * exp(-decay * dt). The root is an immigrant
whose offspring mean is scaled by a per-cascade influence multiplier.
"""
import heapq
import logging
from typing import List, Set, Tuple

import numpy as np

from ..graphs.graph_schemas import GlobalGraph
from ..utils.errors import SupercriticalityError
from .data_schemas import Cascade, GenConfig, RepostEvent

logger = logging.getLogger(__name__)


def preferential_attachment_graph(n_users: int, edges_per_user: int, exponent: float,
                                  rng: np.random.Generator) -> GlobalGraph:
    """Grow a graph from a clique of ``edges_per_user + 1`` users.

    Each new user links to ``edges_per_user`` distinct existing users chosen
    with probability proportional to degree ** exponent.
    """
    seed_size = min(n_users, edges_per_user + 1)
    edges: List[Tuple[int, int]] = [(u, v) for u in range(seed_size) for v in range(u + 1, seed_size)]
    degree = np.zeros(n_users)
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    for new in range(seed_size, n_users):
        weights = degree[:new] ** exponent
        targets = rng.choice(new, size=edges_per_user, replace=False, p=weights / weights.sum())
        for target in sorted(int(t) for t in targets):
            edges.append((target, new))
            degree[target] += 1
            degree[new] += 1
    return GlobalGraph(n_users, edges)


def _pick_child(graph: GlobalGraph, parent: int, used: Set[int], rng: np.random.Generator) -> int:
    """Unused neighbor of ``parent`` if one exists, otherwise any unused user; -1 when none is left."""
    candidates = [u for u in graph.neighbors(parent) if u not in used]
    if candidates:
        return int(candidates[rng.integers(len(candidates))])
    if len(used) >= graph.n_nodes:
        return -1
    while True:
        user = int(rng.integers(graph.n_nodes))
        if user not in used:
            return user


def simulate_cascade(cascade_id: str, graph: GlobalGraph, publish_time: float, root_mean: float,
                     cfg: GenConfig, rng: np.random.Generator) -> Cascade:
    """Grow one cascade within ``[0, cfg.horizon]`` relative to publication."""
    root = int(rng.integers(graph.n_nodes))
    used = {root}
    events: List[RepostEvent] = []
    # (time, order, parent): order breaks ties deterministically
    pending: List[Tuple[float, int, int]] = []
    order = 0

    def spawn(parent: int, start: float, mean: float) -> None:
        nonlocal order
        for delay in rng.exponential(1.0 / cfg.decay, size=rng.poisson(mean)):
            if start + delay <= cfg.horizon:
                heapq.heappush(pending, (start + delay, order, parent))
                order += 1

    spawn(root, 0.0, root_mean)
    while pending and len(events) < cfg.max_events:
        t, _, parent = heapq.heappop(pending)
        child = _pick_child(graph, parent, used, rng)
        if child < 0:
            break
        used.add(child)
        events.append(RepostEvent(parent=parent, child=child, time=float(t)))
        spawn(child, t, cfg.branching)
    return Cascade(cascade_id=cascade_id, root=root, publish_time=publish_time, events=tuple(events))


def generate_synthetic(cfg: GenConfig) -> Tuple[GlobalGraph, List[Cascade]]:
    """Generate a user graph and ``cfg.n_cascades`` cascades, deterministically in ``cfg.seed``.

    Raises:
        SupercriticalityError: If ``cfg.branching >= 1``
    """
    if cfg.branching >= 1.0:
        raise SupercriticalityError(f"branching factor {cfg.branching} >= 1 gives unbounded cascades")

    rng = np.random.default_rng(cfg.seed)
    graph = preferential_attachment_graph(cfg.n_users, cfg.attachment_edges, cfg.attachment_exponent, rng)

    arrivals = np.cumsum(rng.exponential(1.0 / cfg.base_rate, size=cfg.n_cascades))
    influence = rng.gamma(cfg.influence_shape, 1.0 / cfg.influence_shape, size=cfg.n_cascades)
    cascades = []
    for index in range(cfg.n_cascades):
        root_mean = cfg.branching * cfg.root_influence * influence[index]
        cascades.append(simulate_cascade(str(index), graph, float(arrivals[index]), root_mean, cfg, rng))

    sizes = np.array([c.size for c in cascades])
    logger.info(f"Generated {len(cascades)} cascades on {graph}: "
                f"mean size {sizes.mean():.1f}, max {sizes.max()}")
    return graph, cascades
