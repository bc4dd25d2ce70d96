"""Bidirectional jump-ODE cascade encoder.

Each retained event contributes a context row built by masked attention over
the cascade-view and global-view embeddings. A forward and a backward hidden
state then sweep the sequence: they jump through a GRU cell at every event
and drift by an Euler-integrated vector field between events. The two
directions are fused per event by channel attention and layer-normalized.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..autodiff import (
    Tensor, as_tensor, backward_mask, concat, forward_mask, layer_norm, masked_softmax, sigmoid, softmax, stack,
)
from ..autodiff.tensor import ArrayLike
from ..data.sample import CascadeSample
from ..solvers import SolveConfig, solve_euler
from ..utils.errors import DimensionError, EmptySequenceError
from .layers import MLP, GRUCell, Linear
from .params import BoundParams, ModelParams

logger = logging.getLogger(__name__)

# Normalized times live in [0, 1]; scaling spreads them over several frequency bands.
TIME_SCALE = 100.0
TEMPORAL_BASE = 10000.0


def temporal_encoding(t: Union[float, Sequence[float], np.ndarray], d: int) -> np.ndarray:
    """Sinusoidal position code of normalized time.

    Component j (1-based) is cos(s / 10000^((j-1)/d)) for odd j and
    sin(s / 10000^(j/d)) for even j, where s = 100 t.

    Args:
        t: Scalar time or 1-D array of times
        d: Code size, even

    Returns:
        np.ndarray: Shape (d,) for a scalar, (n, d) for n times
    """
    if d <= 0 or d % 2:
        raise DimensionError(f"temporal encoding size must be positive and even, got {d}")
    scaled = np.asarray(t, dtype=np.float64)[..., None] * TIME_SCALE
    k = np.arange(d)
    exponents = np.where(k % 2 == 0, k, k + 1) / d
    angles = scaled / TEMPORAL_BASE ** exponents
    return np.where(k % 2 == 0, np.cos(angles), np.sin(angles))


@dataclass(frozen=True)
class BiContext:
    """Forward and backward context rows, each ``n x 2d``.

    Row i of ``forward`` sees positions j <= i only; row i of ``backward``
    sees positions j >= i only.
    """
    forward: Tensor
    backward: Tensor

    @property
    def n_events(self) -> int:
        return self.forward.shape[0]


def attention(s: ArrayLike, mask: np.ndarray) -> Tensor:
    """Single-head scaled dot-product self-attention with Q = K = V = s."""
    s = as_tensor(s)
    scores = (s @ s.T) * (1.0 / np.sqrt(s.shape[1]))
    return masked_softmax(scores, mask) @ s


def bidirectional_context(global_rows: ArrayLike, cascade_rows: ArrayLike) -> BiContext:
    """Four masked attention passes, concatenated per direction as [cascade; global].

    Args:
        global_rows: n x d global-view embeddings
        cascade_rows: n x d cascade-view embeddings with the temporal code added

    Raises:
        EmptySequenceError: If n = 0
        DimensionError: If the two views differ in shape
    """
    sg, sc = as_tensor(global_rows), as_tensor(cascade_rows)
    if sg.ndim != 2 or sg.shape[0] == 0:
        raise EmptySequenceError("cascade sequence has no events")
    if sg.shape != sc.shape:
        raise DimensionError(f"global view {sg.shape} and cascade view {sc.shape} differ")
    n = sg.shape[0]
    ahead, behind = forward_mask(n), backward_mask(n)
    forward = concat([attention(sc, ahead), attention(sg, ahead)], axis=1)
    backward = concat([attention(sc, behind), attention(sg, behind)], axis=1)
    return BiContext(forward=forward, backward=backward)


def sample_context(sample: CascadeSample) -> BiContext:
    """Context of a featurized cascade; the temporal code goes on the cascade view."""
    d = sample.cascade_rows.shape[1]
    return bidirectional_context(sample.global_rows, sample.cascade_rows + temporal_encoding(sample.times, d))


class SequenceEncoder:
    """Trainable part of the cascade encoder.

    Args:
        params: Registry receiving this encoder's parameters
        embed_dim: Embedding size d; context rows have 2d columns
        hidden_dim: Hidden state size h
        rng: Initializer randomness
        solver: Euler settings for inter-event drift
        bidirectional: Build the backward sweep and the fusion
        prefix: Parameter-name prefix
    """

    def __init__(self, params: ModelParams, embed_dim: int, hidden_dim: int, rng: np.random.Generator,
                 solver: SolveConfig, bidirectional: bool = True, prefix: str = "seq"):
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.solver = solver
        self.bidirectional = bidirectional
        h = hidden_dim

        self.initial = params.add(f"{prefix}.H0", rng.normal(0.0, 0.1, size=h))
        self.gate_forward = Linear(params, f"{prefix}.gate_f", h, h, rng)
        self.drift_forward = MLP(params, f"{prefix}.drift_f", [h, h, h, h], "softplus", rng)
        self.gru_forward = GRUCell(params, f"{prefix}.gru_f", 2 * embed_dim, h, rng)
        if bidirectional:
            self.gate_backward = Linear(params, f"{prefix}.gate_b", h, h, rng)
            self.drift_backward = MLP(params, f"{prefix}.drift_b", [h, h, h, h], "softplus", rng)
            self.gru_backward = GRUCell(params, f"{prefix}.gru_b", 2 * embed_dim, h, rng)
            self.fusion_query = params.add(f"{prefix}.fuse_a", rng.normal(0.0, 0.1, size=h))
            self.fusion_weight = params.add(f"{prefix}.fuse_W", rng.normal(0.0, 1.0 / np.sqrt(h), size=(h, h)))
        self.norm_gain = params.add(f"{prefix}.norm_gain", np.ones(h))
        self.norm_bias = params.add(f"{prefix}.norm_bias", np.zeros(h))

    def self_gate_init(self, p: BoundParams) -> Tuple[Tensor, Tensor]:
        """Gated copies of the shared initial state, one per direction."""
        state = p[self.initial]
        forward = state * sigmoid(self.gate_forward(p, state))
        if not self.bidirectional:
            return forward, forward
        return forward, state * sigmoid(self.gate_backward(p, state))

    def jump_ode_pass(self, p: BoundParams, ctx: BiContext, times: Sequence[float]) -> Tuple[List[Tensor], List[Tensor]]:
        """Sweep the events in both directions.

        Returns:
            Tuple of post-jump forward states and post-jump backward states,
            both indexed by event position. The backward list is empty for
            a forward-only encoder.

        Raises:
            EmptySequenceError: If there are no events
            SolverBudgetError: If an inter-event drift exceeds the step budget
        """
        times = np.asarray(times, dtype=np.float64)
        n = len(times)
        if n == 0:
            raise EmptySequenceError("cascade sequence has no events")
        if ctx.n_events != n:
            raise DimensionError(f"{ctx.n_events} context rows for {n} event times")
        step, budget = self.solver.step, self.solver.max_steps
        start_forward, start_backward = self.self_gate_init(p)

        def drift_forward(y: Tensor) -> Tensor:
            return self.drift_forward(p, y)

        forward: List[Tensor] = []
        state = start_forward
        for i in range(n):
            state = self.gru_forward(p, ctx.forward[i], state)
            forward.append(state)
            if i < n - 1:
                state = solve_euler(drift_forward, state, 0.0, times[i + 1] - times[i], h=step, max_steps=budget)

        if not self.bidirectional:
            return forward, []

        def drift_backward(y: Tensor) -> Tensor:
            return self.drift_backward(p, y)

        backward: List[Tensor] = [None] * n  # type: ignore[list-item]
        state = start_backward
        for i in range(n - 1, -1, -1):
            state = self.gru_backward(p, ctx.backward[i], state)
            backward[i] = state
            if i > 0:
                state = solve_euler(drift_backward, state, 0.0, times[i] - times[i - 1], h=step, max_steps=budget)
        return forward, backward

    def fusion_weights(self, p: BoundParams, forward: Tensor, backward: Tensor) -> Tensor:
        """n x 2 channel-attention weights over (forward, backward)."""
        query, weight = p[self.fusion_query], p[self.fusion_weight]
        logits = stack([(forward @ weight) @ query, (backward @ weight) @ query], axis=1)
        return softmax(logits)

    def fuse(self, p: BoundParams, forward: List[Tensor], backward: List[Tensor]) -> Tensor:
        """Combine both directions per event, then layer-normalize: n x h."""
        forward_states = stack(forward)
        if not self.bidirectional:
            return layer_norm(forward_states, p[self.norm_gain], p[self.norm_bias])
        backward_states = stack(backward)
        gamma = self.fusion_weights(p, forward_states, backward_states)
        mixed = gamma[:, 0:1] * forward_states + gamma[:, 1:2] * backward_states
        return layer_norm(mixed, p[self.norm_gain], p[self.norm_bias])

    def encode(self, p: BoundParams, sample: CascadeSample) -> Tensor:
        """Fused hidden states of a featurized cascade, n x h."""
        ctx = sample_context(sample)
        forward, backward = self.jump_ode_pass(p, ctx, sample.times)
        return self.fuse(p, forward, backward)
