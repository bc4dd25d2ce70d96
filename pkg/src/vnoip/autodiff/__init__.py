"""Dense-tensor numeric core with reverse-mode differentiation."""
from .tensor import (
    Tensor, Tape, Gradients, as_tensor,
    add, sub, mul, div, power, matmul,
    exp, log, log1p, log2p1, sqrt, sigmoid, tanh, softplus, erf, relu,
    tensor_sum, tensor_mean, reshape, transpose, getitem, concat, stack,
)
from .functional import (
    MASK_BLOCKED, forward_mask, backward_mask,
    softmax, masked_softmax, layer_norm, inverse_mills_ratio,
)
from .gradcheck import grad_check, grad_check_params

__all__ = [
    "Tensor", "Tape", "Gradients", "as_tensor",
    "add", "sub", "mul", "div", "power", "matmul",
    "exp", "log", "log1p", "log2p1", "sqrt", "sigmoid", "tanh", "softplus", "erf", "relu",
    "tensor_sum", "tensor_mean", "reshape", "transpose", "getitem", "concat", "stack",
    "MASK_BLOCKED", "forward_mask", "backward_mask",
    "softmax", "masked_softmax", "layer_norm", "inverse_mills_ratio",
    "grad_check", "grad_check_params",
]
