"""Composite and fused differentiable operations used by the model."""
from typing import Tuple, Union

import numpy as np
from scipy import special

from ..utils.errors import DegenerateMaskError, DimensionError, ShapeError
from .tensor import ArrayLike, Tensor, apply_op, as_tensor, sqrt

# Additive mask value for blocked attention positions; finite so arithmetic stays finite.
MASK_BLOCKED = -1e9
LAYER_NORM_EPS = 1e-5
# Beyond this alpha the inverse Mills ratio switches to its asymptotic form.
MILLS_ASYMPTOTIC_ALPHA = 6.0
MILLS_TAIL_FLOOR = 1e-12


def forward_mask(n: int) -> np.ndarray:
    """Additive mask letting position i attend to positions j <= i."""
    rows, cols = np.indices((n, n))
    return np.where(cols <= rows, 0.0, MASK_BLOCKED)


def backward_mask(n: int) -> np.ndarray:
    """Additive mask letting position i attend to positions j >= i."""
    rows, cols = np.indices((n, n))
    return np.where(cols >= rows, 0.0, MASK_BLOCKED)


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(x: ArrayLike) -> Tensor:
    """Softmax over the last axis."""
    x = as_tensor(x)
    out = _softmax_rows(x.data)
    return apply_op(out, (x,), lambda g: (out * (g - (g * out).sum(axis=-1, keepdims=True)),))


def masked_softmax(scores: ArrayLike, mask: Union[np.ndarray, Tensor]) -> Tensor:
    """Row-wise softmax of ``scores + mask``.

    Args:
        scores: n x n attention logits
        mask: n x n additive mask; 0 allows a position, ``MASK_BLOCKED`` blocks it.
            The mask is a constant and receives no gradient.

    Returns:
        Tensor: n x n matrix whose rows are probability vectors over allowed positions

    Raises:
        DimensionError: If ``scores`` and ``mask`` differ in shape
        DegenerateMaskError: If some row blocks every position
    """
    scores = as_tensor(scores)
    mask_data = mask.data if isinstance(mask, Tensor) else np.asarray(mask, dtype=np.float64)
    if scores.ndim != 2:
        raise ShapeError(f"masked_softmax needs a matrix, got shape {scores.shape}")
    if scores.shape != mask_data.shape:
        raise DimensionError(f"scores {scores.shape} and mask {mask_data.shape} differ")
    blocked_rows = np.all(mask_data <= MASK_BLOCKED / 2, axis=-1)
    if np.any(blocked_rows):
        raise DegenerateMaskError(f"rows {np.flatnonzero(blocked_rows).tolist()} have no allowed position")

    out = _softmax_rows(scores.data + mask_data)
    return apply_op(out, (scores,), lambda g: (out * (g - (g * out).sum(axis=-1, keepdims=True)),))


def layer_norm(x: ArrayLike, gain: ArrayLike, bias: ArrayLike, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Normalize the last axis to zero mean and unit variance, then scale and shift."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(f"layer_norm gain/bias must have shape ({d},), got {gain.shape}/{bias.shape}")
    centered = x - x.mean(axis=-1, keepdims=True)
    variance = (centered * centered).mean(axis=-1, keepdims=True)
    return centered / sqrt(variance + eps) * gain + bias


def _mills_values(alpha: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse Mills ratio and its derivative, elementwise."""
    density = np.exp(-0.5 * alpha * alpha) / np.sqrt(2.0 * np.pi)
    tail = np.maximum(0.5 * special.erfc(alpha / np.sqrt(2.0)), MILLS_TAIL_FLOOR)
    exact = density / tail
    safe_alpha = np.where(alpha > MILLS_ASYMPTOTIC_ALPHA, alpha, 1.0)
    asymptotic = safe_alpha + 1.0 / safe_alpha
    tail_region = alpha > MILLS_ASYMPTOTIC_ALPHA
    value = np.where(tail_region, asymptotic, exact)
    derivative = np.where(tail_region, 1.0 - 1.0 / (safe_alpha * safe_alpha), exact * (exact - alpha))
    return value, derivative


def inverse_mills_ratio(alpha: ArrayLike) -> Tensor:
    """phi(alpha) / (1 - Phi(alpha)) with the normal tail taken from erfc.

    The tail 1 - Phi is floored at 1e-12 and alpha > 6 uses alpha + 1/alpha.
    """
    alpha = as_tensor(alpha)
    value, derivative = _mills_values(alpha.data)
    return apply_op(value, (alpha,), lambda g: (g * derivative,))
