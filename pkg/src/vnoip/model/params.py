"""Named parameter registry and its per-tape binding."""
import logging
from typing import Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from ..autodiff import Tape, Tensor
from ..utils.errors import CheckpointError, ConfigError, DimensionError

logger = logging.getLogger(__name__)


class BoundParams(Mapping[str, Tensor]):
    """Parameters as tensors for one forward pass.

    Bound to a tape they are watched leaves; bound without a tape they are
    constants and the forward pass records nothing.
    """

    def __init__(self, tensors: Dict[str, Tensor], tape: Optional[Tape]):
        self._tensors = tensors
        self.tape = tape

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)


class ModelParams:
    """Ordered collection of named float64 arrays."""

    def __init__(self):
        self._values: Dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> str:
        if name in self._values:
            raise ConfigError(f"parameter {name!r} registered twice")
        self._values[name] = np.array(value, dtype=np.float64)
        return name

    def __getitem__(self, name: str) -> np.ndarray:
        return self._values[name]

    def __contains__(self, name: object) -> bool:
        return name in self._values

    def __len__(self) -> int:
        return len(self._values)

    def names(self) -> Tuple[str, ...]:
        return tuple(self._values)

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self._values.items())

    @property
    def n_scalars(self) -> int:
        return sum(v.size for v in self._values.values())

    def set(self, name: str, value: np.ndarray) -> None:
        """Replace a parameter value, keeping its shape."""
        value = np.array(value, dtype=np.float64)
        if name not in self._values:
            raise KeyError(name)
        if value.shape != self._values[name].shape:
            raise DimensionError(f"{name}: shape {value.shape} does not match {self._values[name].shape}")
        self._values[name] = value

    def bind(self, tape: Optional[Tape] = None) -> BoundParams:
        if tape is None:
            return BoundParams({name: Tensor(v) for name, v in self._values.items()}, None)
        return BoundParams({name: tape.watch(v) for name, v in self._values.items()}, tape)

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: v.copy() for name, v in self._values.items()}

    def load_state(self, state: Mapping[str, np.ndarray]) -> None:
        """Overwrite every parameter from ``state``.

        Raises:
            CheckpointError: On unknown or missing names or a shape mismatch
        """
        unknown = sorted(set(state) - set(self._values))
        if unknown:
            raise CheckpointError(f"unknown parameters: {', '.join(unknown)}")
        missing = sorted(set(self._values) - set(state))
        if missing:
            raise CheckpointError(f"missing parameters: {', '.join(missing)}")
        for name, value in state.items():
            value = np.asarray(value, dtype=np.float64)
            if value.shape != self._values[name].shape:
                raise CheckpointError(f"{name}: shape {value.shape} does not match {self._values[name].shape}")
        for name, value in state.items():
            self._values[name] = np.array(value, dtype=np.float64)
        logger.debug(f"Loaded {len(state)} parameters")
