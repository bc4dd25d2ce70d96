"""Variational popularity-trend generation.

Observed trajectories and cascade states are pooled into prior and posterior
latent Gaussians. A latent sample seeds a neural ODE over ``[z; P]`` whose
popularity component grows by the mean of a normal truncated below at zero,
so every generated trend is increasing.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..autodiff import Tensor, as_tensor, concat, inverse_mills_ratio, log2p1, sigmoid, softmax, softplus
from ..autodiff.tensor import ArrayLike
from ..solvers import SolveConfig, odeint
from ..utils.errors import DimensionError, EmptySequenceError
from .layers import MLP
from .params import BoundParams, ModelParams

logger = logging.getLogger(__name__)

SIGMA_FLOOR = 0.1
SIGMA_SPAN = 0.9

Trajectory = Sequence[Tuple[float, float]]


def bounded_sigma(pre_activation: Tensor) -> Tensor:
    """Standard deviation in (0.1, 1.0)."""
    return SIGMA_FLOOR + SIGMA_SPAN * sigmoid(pre_activation)


def truncated_normal_mean(mean: ArrayLike, std: ArrayLike) -> Tensor:
    """E[X | X > 0] for X ~ N(mean, std^2): mean + std * phi(alpha) / (1 - Phi(alpha)), alpha = -mean / std."""
    mean, std = as_tensor(mean), as_tensor(std)
    return mean + std * inverse_mills_ratio(-mean / std)


@dataclass(frozen=True)
class DiagonalGaussian:
    mean: Tensor
    std: Tensor

    def sample(self, noise: Optional[np.ndarray]) -> Tensor:
        if noise is None:
            return self.mean
        return self.mean + self.std * noise


@dataclass(frozen=True)
class TrendOutput:
    """A generated trend.

    Attributes:
        popularity: Cumulative popularity at the T grid times
        latent: Latent state at the T grid times, T x z
        initial: Latent state the solve started from
    """
    popularity: Tensor
    latent: Tensor
    initial: Tensor

    @property
    def final_latent(self) -> Tensor:
        return self.latent[-1]


def trajectory_features(trajectory: Trajectory) -> np.ndarray:
    """Rows [log2(P + 1), t] of a (t, P) trajectory."""
    if len(trajectory) == 0:
        raise EmptySequenceError("trajectory has no points")
    points = np.asarray(trajectory, dtype=np.float64)
    return np.column_stack([np.log2(points[:, 1] + 1.0), points[:, 0]])


def pool(query: ArrayLike, keys: ArrayLike) -> Tensor:
    """Unmasked attention of one query over ``keys``, which double as values."""
    query, keys = as_tensor(query), as_tensor(keys)
    if keys.ndim != 2 or keys.shape[0] == 0:
        raise EmptySequenceError("pooling needs at least one key")
    if query.shape != (keys.shape[1],):
        raise DimensionError(f"query {query.shape} does not match keys {keys.shape}")
    weights = softmax((keys @ query) * (1.0 / np.sqrt(keys.shape[1])))
    return weights @ keys


class TrendVAE:
    """Latent inference, trend generation and the popularity decoder.

    Args:
        params: Registry receiving this module's parameters
        hidden_dim: Size h of the cascade states it pools
        latent_dim: Latent size z
        n_grid: Number of future grid points T the decoder reads
        rng: Initializer randomness
        solver: Adaptive solver settings for trend generation
        decoder_layers: 1 for a single linear decoder layer, 2 for a ReLU MLP
        with_trend: False builds a decoder that reads only the cascade states
        prefix: Parameter-name prefix
    """

    def __init__(self, params: ModelParams, hidden_dim: int, latent_dim: int, n_grid: int,
                 rng: np.random.Generator, solver: SolveConfig, decoder_layers: int = 2,
                 with_trend: bool = True, prefix: str = "trend"):
        h, z = hidden_dim, latent_dim
        self.hidden_dim = h
        self.latent_dim = z
        self.n_grid = n_grid
        self.solver = solver
        self.with_trend = with_trend

        decoder_in = 2 * h + (n_grid if with_trend else 0)
        decoder_sizes = [decoder_in, 1] if decoder_layers == 1 else [decoder_in, h, 1]
        self.decoder = MLP(params, f"{prefix}.decoder", decoder_sizes, "relu", rng)
        if not with_trend:
            return

        self.trajectory_encoder = MLP(params, f"{prefix}.traj", [2, z, z], "relu", rng)
        self.trajectory_query = params.add(f"{prefix}.Zp", rng.normal(0.0, 1.0 / np.sqrt(z), size=z))
        self.state_query = params.add(f"{prefix}.Zh", rng.normal(0.0, 1.0 / np.sqrt(h), size=h))
        self.prior_mean = MLP(params, f"{prefix}.mu_p", [z + h, z, z], "relu", rng)
        self.prior_std = MLP(params, f"{prefix}.sigma_p", [z + h, z, z], "relu", rng)
        self.post_mean = MLP(params, f"{prefix}.mu_q", [z + h, z, z], "relu", rng)
        self.post_std = MLP(params, f"{prefix}.sigma_q", [z + h, z, z], "relu", rng)
        self.latent_drift = MLP(params, f"{prefix}.f_z", [z, z, z, z], "tanh", rng)
        self.increment_mean = MLP(params, f"{prefix}.mu_f", [z, z, z, 1], "tanh", rng)
        self.increment_std = MLP(params, f"{prefix}.sigma_f", [z, z, z, 1], "tanh", rng)

    def encode_trajectory(self, p: BoundParams, trajectory: Trajectory) -> Tensor:
        """Per-point latent rows, n x z."""
        return self.trajectory_encoder(p, as_tensor(trajectory_features(trajectory)))

    def pool_trajectory(self, p: BoundParams, trajectory: Trajectory) -> Tensor:
        return pool(p[self.trajectory_query], self.encode_trajectory(p, trajectory))

    def pool_states(self, p: BoundParams, states: Tensor) -> Tensor:
        return pool(p[self.state_query], states)

    def prior(self, p: BoundParams, context: Tensor, pooled_states: Tensor) -> DiagonalGaussian:
        features = concat([context, pooled_states])
        return DiagonalGaussian(self.prior_mean(p, features), bounded_sigma(self.prior_std(p, features)))

    def posterior(self, p: BoundParams, target: Tensor, pooled_states: Tensor) -> DiagonalGaussian:
        features = concat([target, pooled_states])
        return DiagonalGaussian(self.post_mean(p, features), bounded_sigma(self.post_std(p, features)))

    def infer_latents(self, p: BoundParams, context: Tensor, target: Tensor, pooled_states: Tensor,
                      noise: Optional[np.ndarray]) -> Tuple[DiagonalGaussian, DiagonalGaussian, Tensor, Tensor]:
        """Prior and posterior Gaussians with paired reparameterized samples.

        Both samples use the same ``noise``; ``None`` or zeros give the means.
        """
        prior = self.prior(p, context, pooled_states)
        post = self.posterior(p, target, pooled_states)
        return prior, post, prior.sample(noise), post.sample(noise)

    def vector_field(self, p: BoundParams):
        z = self.latent_dim

        def field(y: Tensor) -> Tensor:
            latent = y[:z]
            mean = self.increment_mean(p, latent)
            std = bounded_sigma(self.increment_std(p, latent))
            increment = truncated_normal_mean(mean, std)
            return concat([self.latent_drift(p, latent), increment])

        return field

    def generate_trend(self, p: BoundParams, z0: Tensor, observed_popularity: float, start_time: float,
                       grid: Sequence[float]) -> TrendOutput:
        """Integrate [z; P] from ``start_time`` and read it at the grid times.

        Args:
            z0: Initial latent state
            observed_popularity: P at ``start_time``, the observed count
            start_time: Normalized observation time t_o
            grid: Strictly increasing normalized times in (t_o, t_p]

        Raises:
            NumericDomainError: If the grid is not strictly increasing after ``start_time``
            StiffnessError: If the adaptive solver fails
        """
        z = self.latent_dim
        y0 = concat([z0, as_tensor(np.array([observed_popularity], dtype=np.float64))])
        path = odeint(self.vector_field(p), y0, grid, self.solver, t0=start_time)
        return TrendOutput(popularity=path[:, z], latent=path[:, :z], initial=z0)

    def decode(self, p: BoundParams, first_state: Tensor, last_state: Tensor,
               trend: Optional[Tensor] = None) -> Tensor:
        """Incremental popularity from the end states and the generated trend, a scalar >= 0."""
        parts = [first_state, last_state]
        if self.with_trend:
            if trend is None:
                raise DimensionError("decoder expects a trend")
            parts.append(log2p1(trend))
        return softplus(self.decoder(p, concat(parts)))[0]
