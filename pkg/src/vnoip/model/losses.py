"""Training objective: prediction error, trend fit, KL and latent distillation."""
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..autodiff import Tensor, as_tensor, concat, log, log2p1
from ..autodiff.tensor import ArrayLike
from ..utils.errors import DimensionError
from .trend import DiagonalGaussian


def kl_gaussians(q: DiagonalGaussian, p: DiagonalGaussian) -> Tensor:
    """KL(q || p) between diagonal Gaussians, summed over dimensions."""
    if q.mean.shape != p.mean.shape:
        raise DimensionError(f"KL between shapes {q.mean.shape} and {p.mean.shape}")
    ratio = q.std / p.std
    diff = (q.mean - p.mean) / p.std
    return (-log(ratio) + 0.5 * (ratio * ratio + diff * diff) - 0.5).sum()


def kd_loss(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Symmetric distillation penalty between two latent points, 0.5 ||a - b||^2.

    Each point is read as a unit-variance Gaussian; the average of the two
    directed KL divergences between them reduces to this form.
    """
    a, b = as_tensor(a), as_tensor(b)
    diff = a - b
    return 0.5 * (diff * diff).sum()


def squared_log_error(target: ArrayLike, prediction: ArrayLike) -> Tensor:
    """(log2(P + 1) - log2(P_hat + 1))^2, elementwise."""
    gap = log2p1(as_tensor(target)) - log2p1(as_tensor(prediction))
    return gap * gap


@dataclass(frozen=True)
class LossBreakdown:
    """Total objective and its parts; absent parts are zero."""
    total: Tensor
    main: float
    trend_fit: float = 0.0
    kl: float = 0.0
    kd: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return {
            "total": self.total.item(),
            "main": self.main,
            "trend_fit": self.trend_fit,
            "kl": self.kl,
            "kd": self.kd,
        }


def total_loss(label: float, prediction: Tensor, true_grid: ArrayLike,
               prior_trend: Optional[Tensor] = None, post_trend: Optional[Tensor] = None,
               kl: Optional[Tensor] = None, kd: Optional[Tensor] = None,
               lambda_fit: float = 0.3, lambda_align: float = 0.6) -> LossBreakdown:
    """L_main + lambda_fit * L_rg + lambda_align * (L_kl + L_kd).

    L_rg averages the squared log error over every grid point of every trend
    given; parts passed as ``None`` are left out.

    Args:
        label: True incremental popularity
        prediction: Predicted incremental popularity, a scalar tensor
        true_grid: True cumulative popularity at the grid times
        prior_trend: Trend generated from the prior latent
        post_trend: Trend generated from the posterior latent
        kl: KL(posterior || prior) at the initial latent
        kd: Distillation penalty at the horizon
        lambda_fit: Weight of the trend fit
        lambda_align: Weight of the latent alignment terms
    """
    main = squared_log_error(float(label), prediction)
    total = main
    parts: Dict[str, float] = {"main": main.item()}

    trends = [t for t in (prior_trend, post_trend) if t is not None]
    if trends:
        truth = np.asarray(true_grid, dtype=np.float64)
        fit = squared_log_error(np.concatenate([truth] * len(trends)), concat(trends)).mean()
        total = total + lambda_fit * fit
        parts["trend_fit"] = fit.item()
    if kl is not None:
        total = total + lambda_align * kl
        parts["kl"] = kl.item()
    if kd is not None:
        total = total + lambda_align * kd
        parts["kd"] = kd.item()
    return LossBreakdown(total=total, **parts)
