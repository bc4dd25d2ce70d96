"""The VNOIP popularity model and its ablation variants."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..autodiff import Tensor
from ..data.sample import CascadeSample
from .losses import LossBreakdown, kd_loss, kl_gaussians, total_loss
from .model_schemas import ModelConfig
from .params import BoundParams, ModelParams
from .sequence import SequenceEncoder
from .trend import DiagonalGaussian, TrendOutput, TrendVAE

logger = logging.getLogger(__name__)


def training_noise(seed: int, epoch: int, position: int, dim: int) -> np.ndarray:
    """Standard-normal draw keyed by (seed, epoch, position in the epoch)."""
    return np.random.default_rng(np.random.SeedSequence([seed, epoch, position])).standard_normal(dim)


@dataclass(frozen=True)
class ForwardResult:
    """Prediction and the intermediate quantities the loss needs."""
    prediction: Tensor
    prior: Optional[DiagonalGaussian] = None
    post: Optional[DiagonalGaussian] = None
    prior_trend: Optional[TrendOutput] = None
    post_trend: Optional[TrendOutput] = None


class VNOIP:
    """Cascade encoder, variational trend generator and decoder.

    Args:
        config: Architecture settings, including the variant
        n_grid: Number of future grid points T
        seed: Seed of the parameter initializer
    """

    def __init__(self, config: ModelConfig, n_grid: int, seed: int = 0):
        self.config = config
        self.n_grid = n_grid
        self.params = ModelParams()
        rng = np.random.default_rng(seed)
        self.encoder = SequenceEncoder(self.params, config.embed_dim, config.hidden_dim, rng,
                                       config.sequence_solver(), bidirectional=config.variant != "forward_only")
        self.trend = TrendVAE(self.params, config.hidden_dim, config.latent_dim, n_grid, rng,
                              config.trend_solver(), decoder_layers=config.decoder_layers,
                              with_trend=config.variant != "no_trend")
        logger.debug(f"Built {config.variant} model with {self.params.n_scalars} parameters")

    @property
    def variant(self) -> str:
        return self.config.variant

    @property
    def uses_posterior(self) -> bool:
        return self.variant not in ("no_trend", "no_variational")

    def forward(self, p: BoundParams, sample: CascadeSample, noise: Optional[np.ndarray] = None,
                training: bool = False) -> ForwardResult:
        """Run the model on one cascade.

        Inference (``training=False``) decodes the trend grown from the prior
        mean and reads nothing past the observation time. Training samples
        both latents with the shared ``noise`` and decodes the posterior trend.
        """
        states = self.encoder.encode(p, sample)
        first, last = states[0], states[-1]
        if self.variant == "no_trend":
            return ForwardResult(prediction=self.trend.decode(p, first, last))

        pooled = self.trend.pool_states(p, states)
        context = self.trend.pool_trajectory(p, sample.context_trajectory)
        prior = self.trend.prior(p, context, pooled)

        def grow(z0: Tensor) -> TrendOutput:
            return self.trend.generate_trend(p, z0, sample.observed_popularity, sample.observation_time,
                                             sample.grid_times)

        if not training or not self.uses_posterior:
            prior_trend = grow(prior.mean)
            return ForwardResult(prediction=self.trend.decode(p, first, last, prior_trend.popularity),
                                 prior=prior, prior_trend=prior_trend)

        target = self.trend.pool_trajectory(p, sample.target_trajectory)
        post = self.trend.posterior(p, target, pooled)
        prior_trend = grow(prior.sample(noise))
        post_trend = grow(post.sample(noise))
        return ForwardResult(prediction=self.trend.decode(p, first, last, post_trend.popularity),
                             prior=prior, post=post, prior_trend=prior_trend, post_trend=post_trend)

    def loss(self, p: BoundParams, sample: CascadeSample, noise: Optional[np.ndarray] = None,
             lambda_fit: float = 0.3, lambda_align: float = 0.6) -> LossBreakdown:
        """Training objective of one cascade for this variant."""
        result = self.forward(p, sample, noise=noise, training=True)
        label, truth = sample.label, sample.grid_popularity
        if self.variant == "no_trend":
            return total_loss(label, result.prediction, truth)
        if not self.uses_posterior:
            return total_loss(label, result.prediction, truth, prior_trend=result.prior_trend.popularity,
                              lambda_fit=lambda_fit, lambda_align=lambda_align)
        kd = None
        if self.variant != "no_distillation":
            kd = kd_loss(result.prior_trend.final_latent, result.post_trend.final_latent)
        return total_loss(label, result.prediction, truth,
                          prior_trend=result.prior_trend.popularity, post_trend=result.post_trend.popularity,
                          kl=kl_gaussians(result.post, result.prior), kd=kd,
                          lambda_fit=lambda_fit, lambda_align=lambda_align)

    def predict(self, sample: CascadeSample) -> float:
        """Incremental popularity on the inference path; the sample is sealed first."""
        sealed = sample if sample.sealed else sample.seal()
        return self.forward(self.params.bind(), sealed).prediction.item()

    def predict_trend(self, sample: CascadeSample) -> Optional[np.ndarray]:
        """Prior-mean trend at the grid times, or ``None`` without a trend module."""
        if self.variant == "no_trend":
            return None
        sealed = sample if sample.sealed else sample.seal()
        return self.forward(self.params.bind(), sealed).prior_trend.popularity.numpy()
