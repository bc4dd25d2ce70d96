"""Adam with bias correction over a :class:`ModelParams` registry."""
from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from ..model.params import ModelParams


@dataclass
class AdamState:
    step: int = 0
    first: Dict[str, np.ndarray] = field(default_factory=dict)
    second: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: ModelParams, grads: Mapping[str, np.ndarray], state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """Apply one Adam update to ``params`` in place.

    Parameters without an entry in ``grads`` get a zero gradient, so their
    moments still decay.

    Returns:
        AdamState: The state after this step; ``state`` is left untouched
    """
    step = state.step + 1
    first: Dict[str, np.ndarray] = {}
    second: Dict[str, np.ndarray] = {}
    for name, value in params.items():
        g = grads.get(name)
        g = np.zeros_like(value) if g is None else np.asarray(g, dtype=np.float64)
        m = beta1 * state.first.get(name, np.zeros_like(value)) + (1.0 - beta1) * g
        v = beta2 * state.second.get(name, np.zeros_like(value)) + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** step)
        v_hat = v / (1.0 - beta2 ** step)
        params.set(name, value - lr * m_hat / (np.sqrt(v_hat) + eps))
        first[name], second[name] = m, v
    return AdamState(step=step, first=first, second=second)
