"""Central finite-difference validation of tape gradients."""
import logging
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .tensor import ArrayLike, Tensor, Tape

logger = logging.getLogger(__name__)

ScalarFn = Callable[[Tensor], Tensor]
ParamsFn = Callable[[Dict[str, Tensor]], Tensor]


def _relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic))


def grad_check(f: ScalarFn, x: ArrayLike, h: float = 1e-5,
               coords: Optional[Sequence[Tuple[int, ...]]] = None) -> float:
    """Compare the tape gradient of ``f`` at ``x`` with central differences.

    Args:
        f: Scalar function of one tensor
        x: Evaluation point
        h: Finite-difference step
        coords: Coordinates to probe; all of them when omitted

    Returns:
        float: max over probed coordinates of |analytic - numeric| / max(1, |analytic|)
    """
    point = np.array(x.data if isinstance(x, Tensor) else x, dtype=np.float64)
    tape = Tape()
    watched = tape.watch(point)
    grads = tape.backward(f(watched))
    analytic = grads.get(watched)
    if analytic is None:
        analytic = np.zeros_like(point)

    worst = 0.0
    for idx in (coords if coords is not None else list(np.ndindex(point.shape))):
        plus, minus = point.copy(), point.copy()
        plus[idx] += h
        minus[idx] -= h
        numeric = (f(Tensor(plus)).item() - f(Tensor(minus)).item()) / (2.0 * h)
        worst = max(worst, _relative_error(float(analytic[idx]), numeric))
    return worst


def grad_check_params(f: ParamsFn, params: Mapping[str, np.ndarray], h: float = 1e-5,
                      max_coords: Optional[int] = None, seed: int = 0) -> float:
    """Grad-check a scalar function of a named parameter collection.

    Args:
        f: Scalar function of a ``name -> Tensor`` mapping
        params: Parameter values
        h: Finite-difference step
        max_coords: Probe a seeded random subset of this many coordinates
            (every coordinate when omitted)
        seed: Seed for the coordinate subset

    Returns:
        float: Maximum relative error over probed coordinates
    """
    values = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
    tape = Tape()
    bound = {name: tape.watch(value) for name, value in values.items()}
    grads = tape.backward(f(bound))

    coords: List[Tuple[str, Tuple[int, ...]]] = [
        (name, idx) for name, value in values.items() for idx in np.ndindex(value.shape)
    ]
    if max_coords is not None and max_coords < len(coords):
        rng = np.random.default_rng(seed)
        chosen = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[i] for i in sorted(chosen)]

    constants = {name: Tensor(value) for name, value in values.items()}
    worst = 0.0
    for name, idx in coords:
        analytic_full = grads.get(bound[name])
        analytic = 0.0 if analytic_full is None else float(analytic_full[idx])
        shifted = values[name].copy()
        shifted[idx] += h
        f_plus = f({**constants, name: Tensor(shifted)}).item()
        shifted[idx] -= 2.0 * h
        f_minus = f({**constants, name: Tensor(shifted)}).item()
        error = _relative_error(analytic, (f_plus - f_minus) / (2.0 * h))
        if error > worst:
            worst = error
            logger.debug(f"grad_check {name}{list(idx)}: analytic {analytic:.6e} error {error:.3e}")
    return worst
