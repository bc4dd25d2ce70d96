"""Filtering and splitting of a corpus into train, validation and test sets."""
import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..utils.errors import ConfigError
from .data_schemas import Cascade

logger = logging.getLogger(__name__)

Split = Tuple[List[Cascade], List[Cascade], List[Cascade]]


def filter_and_split(cascades: Sequence[Cascade], t_o: float, min_participants: int = 10,
                     ratios: Tuple[float, float, float] = (0.7, 0.15, 0.15), seed: int = 0) -> Split:
    """Drop cascades with fewer than ``min_participants`` by ``t_o``, then shuffle and split.

    Participants are the root plus every repost at or before ``t_o``. The
    first two parts get ``round(ratio * n)`` cascades, the test part the rest.

    Raises:
        ConfigError: If the ratios are negative or do not sum to 1
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must be three non-negative values summing to 1, got {ratios}")

    kept = [c for c in cascades if c.popularity_at(t_o) >= min_participants]
    dropped = len(cascades) - len(kept)
    if dropped:
        logger.warning(f"Filtered out {dropped} of {len(cascades)} cascades with fewer than "
                       f"{min_participants} participants by t_o={t_o}")

    order = np.random.default_rng(seed).permutation(len(kept))
    shuffled = [kept[i] for i in order]
    n_train = int(round(ratios[0] * len(shuffled)))
    n_val = min(int(round(ratios[1] * len(shuffled))), len(shuffled) - n_train)
    train = shuffled[:n_train]
    val = shuffled[n_train:n_train + n_val]
    test = shuffled[n_train + n_val:]
    logger.info(f"Split {len(shuffled)} cascades into {len(train)}/{len(val)}/{len(test)}")
    return train, val, test
