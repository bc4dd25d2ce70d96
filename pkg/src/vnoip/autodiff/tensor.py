"""Dense double-precision tensors with a reverse-mode differentiation tape.

A :class:`Tensor` is an immutable value. It participates in differentiation
only when it was produced by :meth:`Tape.watch` or by an operation with at
least one participating input; such tensors carry the owning tape and a
``tape_id``. Operations on constants never touch a tape.

Example:
    >>> tape = Tape()
    >>> x = tape.watch([1.0, 2.0])
    >>> loss = (x * x).sum()
    >>> tape.backward(loss)[x]
    array([2., 4.])
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from ..utils.errors import DimensionError, NumericDomainError, ShapeError, TapeError

logger = logging.getLogger(__name__)

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
VJP = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


@dataclass(frozen=True)
class _Node:
    """One recorded primitive: output id, input ids and its vector-Jacobian product."""
    output_id: int
    input_ids: Tuple[Optional[int], ...]
    vjp: VJP


class Tensor:
    """Dense real array, optionally linked to a differentiation tape."""

    __slots__ = ("data", "tape", "tape_id")
    __array_priority__ = 100.0

    def __init__(self, data: ArrayLike, tape: Optional["Tape"] = None, tape_id: Optional[int] = None):
        if isinstance(data, Tensor):
            data = data.data
        array = np.array(data, dtype=np.float64)
        array.setflags(write=False)
        self.data = array
        self.tape = tape
        self.tape_id = tape_id

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def participating(self) -> bool:
        """Whether this value is recorded on a tape."""
        return self.tape_id is not None

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, tensor has shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        """Writable copy of the values."""
        return self.data.copy()

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        tag = f", tape_id={self.tape_id}" if self.participating else ""
        return f"Tensor(shape={self.shape}{tag}, data={np.array2string(self.data, precision=6)})"

    def __len__(self) -> int:
        return self.shape[0]

    # arithmetic

    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return div(other, self)

    def __neg__(self) -> "Tensor":
        return mul(self, -1.0)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return matmul(self, other)

    def __rmatmul__(self, other: ArrayLike) -> "Tensor":
        return matmul(other, self)

    def __pow__(self, exponent: float) -> "Tensor":
        return power(self, exponent)

    def __getitem__(self, index) -> "Tensor":
        return getitem(self, index)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return tensor_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return tensor_mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: int) -> "Tensor":
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)


class Gradients:
    """Gradients produced by one backward pass, keyed by participating tensor.

    Tensors that did not influence the loss have no entry; lookups on them
    raise ``KeyError`` and :meth:`get` returns the default.
    """

    def __init__(self, by_id: Dict[int, np.ndarray], tape: "Tape"):
        self._by_id = by_id
        self._tape = tape

    def _key(self, tensor: Tensor) -> Optional[int]:
        if tensor.tape is not self._tape:
            return None
        return tensor.tape_id

    def __getitem__(self, tensor: Tensor) -> np.ndarray:
        key = self._key(tensor)
        if key is None or key not in self._by_id:
            raise KeyError("tensor has no gradient on this tape")
        return self._by_id[key]

    def get(self, tensor: Tensor, default: Optional[np.ndarray] = None) -> Optional[np.ndarray]:
        key = self._key(tensor)
        if key is None:
            return default
        return self._by_id.get(key, default)

    def __contains__(self, tensor: object) -> bool:
        return isinstance(tensor, Tensor) and self._key(tensor) in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)

    def ids(self) -> Iterator[int]:
        return iter(self._by_id)


class Tape:
    """Ordered record of primitive operations for one backward pass.

    A tape is single-threaded and single-shot: :meth:`backward` may be called
    once, after which the tape refuses further recording.
    """

    def __init__(self):
        self._nodes: List[_Node] = []
        self._next_id = 0
        self._consumed = False

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def consumed(self) -> bool:
        return self._consumed

    def _allocate(self) -> int:
        if self._consumed:
            raise TapeError("tape already consumed by backward()")
        tape_id = self._next_id
        self._next_id += 1
        return tape_id

    def watch(self, value: ArrayLike) -> Tensor:
        """Register a leaf value (a parameter or input) on this tape."""
        return Tensor(value, tape=self, tape_id=self._allocate())

    def record(self, value: np.ndarray, inputs: Sequence[Tensor], vjp: VJP) -> Tensor:
        """Append a primitive whose output is ``value``; returns the participating output."""
        out = Tensor(value, tape=self, tape_id=self._allocate())
        input_ids = tuple(t.tape_id if t.tape is self else None for t in inputs)
        self._nodes.append(_Node(out.tape_id, input_ids, vjp))
        return out

    def backward(self, loss: Tensor) -> Gradients:
        """Propagate from a scalar loss back through the recorded operations.

        Args:
            loss: Scalar tensor recorded on this tape

        Returns:
            Gradients: One gradient per participating tensor that influences ``loss``

        Raises:
            ShapeError: If ``loss`` is not a scalar
            TapeError: If the tape was already consumed or ``loss`` is not on it
        """
        if self._consumed:
            raise TapeError("backward() already called on this tape")
        if loss.size != 1:
            raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
        if loss.tape is not self:
            raise TapeError("loss is not recorded on this tape")
        self._consumed = True

        grads: Dict[int, np.ndarray] = {loss.tape_id: np.ones_like(loss.data)}
        for node in reversed(self._nodes):
            g_out = grads.get(node.output_id)
            if g_out is None:
                continue
            for input_id, g_in in zip(node.input_ids, node.vjp(g_out)):
                if input_id is None or g_in is None:
                    continue
                if input_id in grads:
                    grads[input_id] = grads[input_id] + g_in
                else:
                    grads[input_id] = np.asarray(g_in, dtype=np.float64)
        logger.debug(f"Backward over {len(self._nodes)} nodes produced {len(grads)} gradients")
        return Gradients(grads, self)


def as_tensor(value: ArrayLike) -> Tensor:
    """Wrap a constant; tensors pass through unchanged."""
    return value if isinstance(value, Tensor) else Tensor(value)


def apply_op(value: np.ndarray, inputs: Sequence[Tensor], vjp: VJP) -> Tensor:
    """Create the output of a primitive, recording it when any input participates."""
    tape: Optional[Tape] = None
    for t in inputs:
        if t.tape is None:
            continue
        if tape is None:
            tape = t.tape
        elif t.tape is not tape:
            raise TapeError("operands belong to different tapes")
    if tape is None:
        return Tensor(value)
    return tape.record(value, inputs, vjp)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise DimensionError(f"cannot broadcast shapes {a.shape} and {b.shape}") from e


# binary elementwise

def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b)
    return apply_op(a.data + b.data, (a, b),
                    lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b)
    return apply_op(a.data - b.data, (a, b),
                    lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b)
    return apply_op(a.data * b.data, (a, b),
                    lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b)
    if np.any(b.data == 0.0):
        raise NumericDomainError("division by zero")
    out = a.data / b.data
    return apply_op(out, (a, b),
                    lambda g: (_unbroadcast(g / b.data, a.shape),
                               _unbroadcast(-g * out / b.data, b.shape)))


def power(a: ArrayLike, exponent: float) -> Tensor:
    a = as_tensor(a)
    if not float(exponent).is_integer() and np.any(a.data < 0.0):
        raise NumericDomainError(f"non-integer power {exponent} of a negative value")
    return apply_op(a.data ** exponent, (a,),
                    lambda g: (g * exponent * a.data ** (exponent - 1),))


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Matrix product for 1-D and 2-D operands (numpy ``@`` semantics)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise ShapeError(f"matmul supports 1-D/2-D operands, got {a.shape} and {b.shape}")
    inner_a = a.shape[-1]
    inner_b = b.shape[0]
    if inner_a != inner_b:
        raise DimensionError(f"matmul inner extents differ: {a.shape} @ {b.shape}")

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if a.ndim == 2 and b.ndim == 2:
            return g @ b.data.T, a.data.T @ g
        if a.ndim == 1 and b.ndim == 2:
            return b.data @ g, np.outer(a.data, g)
        if a.ndim == 2 and b.ndim == 1:
            return np.outer(g, b.data), a.data.T @ g
        return g * b.data, g * a.data

    return apply_op(a.data @ b.data, (a, b), vjp)


# unary elementwise

def exp(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    out = np.exp(x.data)
    return apply_op(out, (x,), lambda g: (g * out,))


def log(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    if np.any(x.data <= 0.0):
        raise NumericDomainError("log requires x > 0")
    return apply_op(np.log(x.data), (x,), lambda g: (g / x.data,))


def log1p(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    if np.any(x.data <= -1.0):
        raise NumericDomainError("log1p requires x > -1")
    return apply_op(np.log1p(x.data), (x,), lambda g: (g / (1.0 + x.data),))


def log2p1(x: ArrayLike) -> Tensor:
    """log2(x + 1), the popularity scale used by every loss."""
    return log1p(x) * (1.0 / np.log(2.0))


def sqrt(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    if np.any(x.data < 0.0):
        raise NumericDomainError("sqrt requires x >= 0")
    out = np.sqrt(x.data)
    return apply_op(out, (x,), lambda g: (0.5 * g / out,))


def sigmoid(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    out = special.expit(x.data)
    return apply_op(out, (x,), lambda g: (g * out * (1.0 - out),))


def tanh(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)
    return apply_op(out, (x,), lambda g: (g * (1.0 - out * out),))


def softplus(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    return apply_op(np.logaddexp(0.0, x.data), (x,), lambda g: (g * special.expit(x.data),))


def erf(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    return apply_op(special.erf(x.data), (x,),
                    lambda g: (g * (2.0 / np.sqrt(np.pi)) * np.exp(-x.data * x.data),))


def relu(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    return apply_op(np.maximum(x.data, 0.0), (x,), lambda g: (g * (x.data > 0.0),))


# structural

def tensor_sum(x: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return apply_op(out, (x,), vjp)


def tensor_mean(x: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else x.shape[axis]
    return tensor_sum(x, axis=axis, keepdims=keepdims) * (1.0 / count)


def reshape(x: ArrayLike, shape: Tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"cannot reshape {x.shape} to {shape}") from e
    return apply_op(out, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    if x.ndim != 2:
        raise ShapeError(f"transpose needs a matrix, got shape {x.shape}")
    return apply_op(x.data.T, (x,), lambda g: (g.T,))


def getitem(x: ArrayLike, index) -> Tensor:
    x = as_tensor(x)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        full = np.zeros(x.shape)
        np.add.at(full, index, g)
        return (full,)

    return apply_op(x.data[index], (x,), vjp)


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    if not parts:
        raise ShapeError("concat of an empty sequence")
    try:
        out = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise DimensionError(f"cannot concatenate shapes {[p.shape for p in parts]}") from e
    bounds = np.cumsum([p.shape[axis] for p in parts])[:-1]
    return apply_op(out, parts, lambda g: tuple(np.split(g, bounds, axis=axis)))


def stack(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    if not parts:
        raise ShapeError("stack of an empty sequence")
    try:
        out = np.stack([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise DimensionError(f"cannot stack shapes {[p.shape for p in parts]}") from e
    return apply_op(out, parts,
                    lambda g: tuple(np.take(g, i, axis=axis) for i in range(len(parts))))
