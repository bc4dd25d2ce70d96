"""Dense layers, perceptrons and the GRU cell.

Layers only remember the names of their parameters; values are looked up in
the :class:`BoundParams` passed to each call.
"""
from typing import Callable, Dict, List, Sequence

import numpy as np

from ..autodiff import Tensor, relu, sigmoid, softplus, tanh
from ..utils.errors import ConfigError
from .params import BoundParams, ModelParams

Activation = Callable[[Tensor], Tensor]

ACTIVATIONS: Dict[str, Activation] = {
    "relu": relu,
    "tanh": tanh,
    "softplus": softplus,
    "sigmoid": sigmoid,
}


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Linear:
    """y = x W + b with W stored as ``in_dim x out_dim``."""

    def __init__(self, params: ModelParams, name: str, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = params.add(f"{name}.weight", glorot(rng, in_dim, out_dim))
        self.bias = params.add(f"{name}.bias", np.zeros(out_dim))

    def __call__(self, p: BoundParams, x: Tensor) -> Tensor:
        return x @ p[self.weight] + p[self.bias]


class MLP:
    """Stack of linear layers with an activation between consecutive layers."""

    def __init__(self, params: ModelParams, name: str, sizes: Sequence[int], activation: str,
                 rng: np.random.Generator):
        if len(sizes) < 2:
            raise ConfigError(f"{name}: an MLP needs at least input and output sizes")
        if activation not in ACTIVATIONS:
            raise ConfigError(f"{name}: unknown activation {activation!r}")
        self.activation = ACTIVATIONS[activation]
        self.layers: List[Linear] = [
            Linear(params, f"{name}.{i}", sizes[i], sizes[i + 1], rng) for i in range(len(sizes) - 1)
        ]

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def __call__(self, p: BoundParams, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(p, x)
            if i < len(self.layers) - 1:
                x = self.activation(x)
        return x


class GRUCell:
    """Gated recurrent unit.

    r = sigmoid(x W_r + h U_r + b_r), z = sigmoid(x W_z + h U_z + b_z),
    n = tanh(x W_n + b_n + r * (h U_n + c_n)), h' = (1 - z) * n + z * h.
    """

    def __init__(self, params: ModelParams, name: str, input_dim: int, hidden_dim: int,
                 rng: np.random.Generator):
        self.hidden_dim = hidden_dim
        self.input_weights = {g: params.add(f"{name}.W_{g}", glorot(rng, input_dim, hidden_dim)) for g in "rzn"}
        self.hidden_weights = {g: params.add(f"{name}.U_{g}", glorot(rng, hidden_dim, hidden_dim)) for g in "rzn"}
        self.biases = {g: params.add(f"{name}.b_{g}", np.zeros(hidden_dim)) for g in "rzn"}
        self.candidate_bias = params.add(f"{name}.c_n", np.zeros(hidden_dim))

    def __call__(self, p: BoundParams, x: Tensor, h: Tensor) -> Tensor:
        w, u, b = self.input_weights, self.hidden_weights, self.biases
        r = sigmoid(x @ p[w["r"]] + h @ p[u["r"]] + p[b["r"]])
        z = sigmoid(x @ p[w["z"]] + h @ p[u["z"]] + p[b["z"]])
        n = tanh(x @ p[w["n"]] + p[b["n"]] + r * (h @ p[u["n"]] + p[self.candidate_bias]))
        return (1.0 - z) * n + z * h


