"""Fixed-step explicit Euler integration, recorded on the tape."""
import logging
import math
from typing import Callable

from ..autodiff import Tensor, as_tensor
from ..autodiff.tensor import ArrayLike
from ..utils.errors import ConfigError, NumericDomainError, SolverBudgetError

logger = logging.getLogger(__name__)

OdeFunc = Callable[[Tensor], Tensor]


def solve_euler(f: OdeFunc, y0: ArrayLike, t0: float, t1: float, h: float = 0.05,
                max_steps: int = 10_000) -> Tensor:
    """Integrate the autonomous system dy/dt = f(y) from t0 to t1.

    Takes ceil((t1 - t0) / h) steps; the last one is shortened to land on t1.

    Args:
        f: Vector field; output shape equals input shape
        y0: State at t0
        t0: Start time
        t1: End time, t1 >= t0
        h: Step size
        max_steps: Step budget

    Returns:
        Tensor: State at t1 (``y0`` itself when t1 == t0)

    Raises:
        NumericDomainError: If t1 < t0
        SolverBudgetError: If the step count exceeds ``max_steps``
    """
    if h <= 0:
        raise ConfigError(f"euler step must be positive, got {h}")
    if t1 < t0:
        raise NumericDomainError(f"euler interval reversed: t0={t0}, t1={t1}")
    y = as_tensor(y0)
    span = t1 - t0
    if span == 0.0:
        return y

    n_steps = max(1, math.ceil(span / h - 1e-9))
    if n_steps > max_steps:
        raise SolverBudgetError(f"euler needs {n_steps} steps over [{t0}, {t1}], budget {max_steps}")
    for k in range(n_steps):
        dt = h if k < n_steps - 1 else span - (n_steps - 1) * h
        y = y + f(y) * dt
    return y
