"""Method dispatch over the available solvers."""
from typing import Sequence

import numpy as np

from ..autodiff import Tensor, as_tensor, stack
from ..autodiff.tensor import ArrayLike
from ..utils.errors import NumericDomainError
from .dopri5 import OdeFunc, solve_dopri5
from .euler import solve_euler
from .solver_schemas import SolveConfig


def odeint(f: OdeFunc, y0: ArrayLike, output_times: Sequence[float], cfg: SolveConfig,
           t0: float = 0.0) -> Tensor:
    """States at ``output_times`` using the method named by ``cfg.method``."""
    if cfg.method == "dopri5":
        return solve_dopri5(f, y0, output_times, cfg, t0=t0)

    times = np.asarray(output_times, dtype=np.float64)
    if times.size == 0 or np.any(np.diff(times) <= 0.0) or times[0] < t0:
        raise NumericDomainError(f"invalid output times {times.tolist()} from start {t0}")
    y = as_tensor(y0)
    t = float(t0)
    outputs = []
    for target in times:
        y = solve_euler(f, y, t, float(target), h=cfg.step, max_steps=cfg.max_steps)
        t = float(target)
        outputs.append(y)
    return stack(outputs)
