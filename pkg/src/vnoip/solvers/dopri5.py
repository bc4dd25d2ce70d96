"""Adaptive Dormand-Prince 5(4) integration with PI step-size control.

Stages are evaluated with tape operations so the solution is differentiable
with respect to everything ``f`` closes over. Step acceptance and step-size
selection read plain values only and are not recorded.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..autodiff import Tensor, as_tensor, stack
from ..autodiff.tensor import ArrayLike
from ..utils.errors import NumericDomainError, StiffnessError
from .solver_schemas import DOPRI5_DEFAULT, SolveConfig

logger = logging.getLogger(__name__)

OdeFunc = Callable[[Tensor], Tensor]

# Butcher tableau
C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
ERR = tuple(b5 - b4 for b5, b4 in zip(B5, B4))

ORDER = 5
# PI controller exponents
BETA_P = 0.7 / ORDER
BETA_I = 0.4 / ORDER
MIN_ERR_PREV = 1e-4


def _combine(y: Tensor, dt: float, coeffs: Sequence[float], ks: Sequence[Tensor]) -> Tensor:
    increment: Optional[Tensor] = None
    for a, k in zip(coeffs, ks):
        if a == 0.0:
            continue
        term = k * (dt * a)
        increment = term if increment is None else increment + term
    return y if increment is None else y + increment


def _step(f: OdeFunc, y: Tensor, k1: Tensor, dt: float) -> Tuple[Tensor, Tensor, np.ndarray]:
    """One Dormand-Prince step; returns the 5th-order state, f at it, and the error estimate."""
    ks = [k1]
    for row in A[1:6]:
        ks.append(f(_combine(y, dt, row, ks)))
    y_new = _combine(y, dt, A[6], ks)
    k7 = f(y_new)
    ks.append(k7)
    error = dt * sum(e * k.data for e, k in zip(ERR, ks) if e != 0.0)
    return y_new, k7, error


def _rms(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean(values * values))) if values.size else 0.0


def _initial_step(f: OdeFunc, y: Tensor, f0: Tensor, span: float, cfg: SolveConfig) -> float:
    """Starting step from the derivative scale (Hairer, Norsett and Wanner)."""
    scale = cfg.atol + cfg.rtol * np.abs(y.data)
    d0 = _rms(y.data / scale)
    d1 = _rms(f0.data / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(Tensor(y.data + h0 * f0.data))
    d2 = _rms((f1.data - f0.data) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100.0 * h0, h1, span)


def solve_dopri5(f: OdeFunc, y0: ArrayLike, output_times: Sequence[float],
                 cfg: SolveConfig = DOPRI5_DEFAULT, t0: float = 0.0) -> Tensor:
    """Integrate dy/dt = f(y) from ``t0`` and report the state at each output time.

    Every output time is reached by an accepted step that ends exactly on it,
    so no interpolation is involved.

    Args:
        f: Autonomous vector field
        y0: State at ``t0``
        output_times: Strictly increasing times, the first one >= ``t0``
        cfg: Tolerances, controller settings and step budget
        t0: Integration start

    Returns:
        Tensor: ``len(output_times) x d`` states

    Raises:
        NumericDomainError: If output times are unordered or precede ``t0``
        StiffnessError: On step-size underflow or when the step budget is spent
    """
    times = np.asarray(output_times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise NumericDomainError("output_times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) <= 0.0):
        raise NumericDomainError(f"output_times must be strictly increasing, got {times.tolist()}")
    if times[0] < t0:
        raise NumericDomainError(f"first output time {times[0]} precedes the start {t0}")

    y = as_tensor(y0)
    t = float(t0)
    k1 = f(y)
    span = float(times[-1]) - t
    h = _initial_step(f, y, k1, span, cfg) if span > 0.0 else 0.0
    err_prev = 1.0
    n_steps = 0
    n_rejected = 0
    outputs: List[Tensor] = []

    for target in times:
        target = float(target)
        while t < target:
            if n_steps >= cfg.max_steps:
                raise StiffnessError(f"dopri5 spent {cfg.max_steps} steps before t={target} (reached t={t})")
            remaining = target - t
            landing = h >= remaining
            dt = remaining if landing else h
            y_new, k7, error = _step(f, y, k1, dt)
            n_steps += 1

            scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y.data), np.abs(y_new.data))
            err = _rms(error / scale)
            if not math.isfinite(err):
                err = math.inf

            if err <= 1.0:
                t = target if landing else t + dt
                y, k1 = y_new, k7
                if err == 0.0:
                    factor = cfg.max_factor
                else:
                    factor = cfg.safety * err ** (-BETA_P) * err_prev ** BETA_I
                    factor = min(cfg.max_factor, max(cfg.min_factor, factor))
                err_prev = max(err, MIN_ERR_PREV)
                if not landing:
                    h = dt * factor
            else:
                n_rejected += 1
                shrink = cfg.min_factor if not math.isfinite(err) else cfg.safety * err ** (-1.0 / ORDER)
                h = dt * min(1.0, max(cfg.min_factor, shrink))
                if h <= 1e-14 * max(1.0, abs(t)):
                    raise StiffnessError(f"dopri5 step size underflow at t={t} (h={h:.3e})")
                logger.debug(f"dopri5 rejected step at t={t:.6f}: err={err:.3e}, new h={h:.3e}")
        outputs.append(y)

    logger.debug(f"dopri5 finished {n_steps} steps ({n_rejected} rejected) over [{t0}, {times[-1]}]")
    return stack(outputs)
