"""Cascade encoder, variational trend module and the full model."""
from .layers import MLP, GRUCell, Linear
from .losses import LossBreakdown, kd_loss, kl_gaussians, squared_log_error, total_loss
from .model_schemas import VARIANTS, ModelConfig
from .params import BoundParams, ModelParams
from .sequence import BiContext, SequenceEncoder, bidirectional_context, sample_context, temporal_encoding
from .trend import DiagonalGaussian, TrendOutput, TrendVAE, pool, truncated_normal_mean
from .vnoip import VNOIP, ForwardResult, training_noise

__all__ = [
    "MLP", "GRUCell", "Linear",
    "LossBreakdown", "kd_loss", "kl_gaussians", "squared_log_error", "total_loss",
    "VARIANTS", "ModelConfig",
    "BoundParams", "ModelParams",
    "BiContext", "SequenceEncoder", "bidirectional_context", "sample_context", "temporal_encoding",
    "DiagonalGaussian", "TrendOutput", "TrendVAE", "pool", "truncated_normal_mean",
    "VNOIP", "ForwardResult", "training_noise",
]
