"""Finite-difference checks of every gradient path, run by ``vnoip gradcheck``."""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List

import numpy as np

from ..autodiff import (
    Tensor, concat, erf, exp, forward_mask, getitem, grad_check, grad_check_params, inverse_mills_ratio,
    layer_norm, log, log1p, log2p1, masked_softmax, relu, sigmoid, softmax, softplus, sqrt, stack, tanh,
)
from ..data.sample import CascadeSample
from ..model import VNOIP, ModelConfig, ModelParams, SequenceEncoder, bidirectional_context, training_noise
from ..solvers import SolveConfig

logger = logging.getLogger(__name__)

PRIMITIVE_TOL = 1e-6
MODEL_TOL = 1e-4


@dataclass(frozen=True)
class GradCheckRecord:
    group: str
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error < self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


def _signed(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(0.2, 1.5, size=n) * rng.choice([-1.0, 1.0], size=n)


def primitive_checks(rng: np.random.Generator) -> Dict[str, Callable[[float], float]]:
    """Named checks of the autodiff primitives; each maps a step size to the worst relative error."""
    b, v = rng.normal(size=(3, 2)), rng.normal(size=2)
    weights = rng.normal(size=(3, 3))
    gain, bias, norm_weights = rng.normal(size=4), rng.normal(size=4), rng.normal(size=(2, 4))
    signed, positive = _signed(rng, 5), rng.uniform(0.5, 3.0, size=4)
    square, vector, matrix = rng.normal(size=(3, 3)), rng.normal(size=3), rng.normal(size=(4, 3))
    alpha = np.array([-3.0, -0.5, 0.0, 1.2, 4.0, 8.0])

    def check(fn: Callable[[Tensor], Tensor], x: np.ndarray) -> Callable[[float], float]:
        return lambda h: grad_check(fn, x, h=h)

    return {
        "arithmetic": check(lambda x: (x / (x * x + 1.0)).sum() + (x ** 3).mean(), signed),
        "exp": check(lambda x: exp(x).sum(), signed),
        "log": check(lambda x: log(x).sum(), positive),
        "log1p": check(lambda x: log1p(x).sum(), positive),
        "log2p1": check(lambda x: log2p1(x).sum(), positive),
        "sqrt": check(lambda x: sqrt(x).sum(), positive),
        "tanh": check(lambda x: tanh(x).sum(), signed),
        "sigmoid": check(lambda x: sigmoid(x).sum(), signed),
        "softplus": check(lambda x: softplus(x).sum(), signed),
        "relu": check(lambda x: (relu(x) * x).sum(), signed),
        "erf": check(lambda x: erf(x).sum(), signed),
        "matmul": check(lambda a: ((a @ b) @ v).sum(), matrix),
        "transpose": check(lambda a: (a.T @ a).sum(), square),
        "indexing": check(lambda x: (getitem(x, [0, 0, 2]) ** 2).sum(), vector),
        "concat_stack": check(lambda x: (concat([x, x * 2.0]) ** 2).sum() + (stack([x, x * x], axis=1) ** 2).sum(),
                              vector),
        "softmax": check(lambda s: (softmax(s) * weights).sum(), square),
        "masked_softmax": check(lambda s: (masked_softmax(s, forward_mask(3)) * weights).sum(), square),
        "layer_norm": check(lambda x: (layer_norm(x, gain, bias) * norm_weights).sum(), rng.normal(size=(2, 4))),
        "inverse_mills_ratio": check(lambda a: inverse_mills_ratio(a).sum(), alpha),
    }


def toy_cascade(embed_dim: int = 4, seed: int = 17) -> CascadeSample:
    """A three-event cascade with random embeddings."""
    rng = np.random.default_rng(seed)
    return CascadeSample(
        cascade_id="gradcheck",
        users=(0, 1, 2),
        times=np.array([0.0, 0.1, 0.25]),
        global_rows=rng.normal(size=(3, embed_dim)),
        cascade_rows=rng.normal(size=(3, embed_dim)),
        context_popularity=np.arange(1, 4),
        observation_time=0.3,
        observed_popularity=3.0,
        grid_times=np.array([0.65, 1.0]),
        grid_popularity_values=np.array([4.0, 5.0]),
        label_value=2.0,
    )


def sequence_check(h: float, seed: int = 21) -> float:
    """Jump-ODE sweeps and fusion on a three-event cascade."""
    params = ModelParams()
    rng = np.random.default_rng(seed)
    encoder = SequenceEncoder(params, 4, 3, rng, SolveConfig(method="euler", step=0.05))
    ctx = bidirectional_context(rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
    readout = rng.normal(size=(3, 3))
    times = [0.0, 0.12, 0.3]

    def objective(p):
        forward, backward = encoder.jump_ode_pass(p, ctx, times)
        return (encoder.fuse(p, forward, backward) * readout).sum()

    return grad_check_params(objective, params.state_dict(), h=h)


def full_loss_check(h: float, seed: int = 7, max_coords: int = 150) -> float:
    """Complete training loss of a toy model on a toy cascade."""
    config = ModelConfig(hidden_dim=3, latent_dim=2, embed_dim=4, trend_rtol=1e-10, trend_atol=1e-10)
    model = VNOIP(config, n_grid=2, seed=seed)
    sample = toy_cascade()
    noise = training_noise(seed, 1, 0, config.latent_dim)

    def objective(p):
        return model.loss(p, sample, noise=noise).total

    return grad_check_params(objective, model.params.state_dict(), h=h, max_coords=max_coords, seed=seed)


def run_gradcheck_suite(h: float = 1e-5, seed: int = 0) -> List[GradCheckRecord]:
    """Run every check and return one record per check."""
    records = [
        GradCheckRecord("primitives", name, check(h), PRIMITIVE_TOL)
        for name, check in primitive_checks(np.random.default_rng(seed)).items()
    ]
    records.append(GradCheckRecord("sequence", "jump_ode_pass+fuse", sequence_check(h), MODEL_TOL))
    records.append(GradCheckRecord("full_loss", "total_loss", full_loss_check(h), MODEL_TOL))
    for record in records:
        report = logger.info if record.passed else logger.error
        report(f"gradcheck {record.group}/{record.name}: {record.error:.3e} (tolerance {record.tolerance:.0e})")
    return records
