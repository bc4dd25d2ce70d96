"""Exception hierarchy shared by every vnoip module.

Each class carries an ``exit_code`` category that the command line maps to its
process exit status: 2 parse, 3 config, 4 numeric, 5 data, 1 anything else.
"""
from typing import Any, Dict, Optional


class VnoipError(Exception):
    """Base class for all errors raised by vnoip."""

    exit_code: int = 1


# Parse errors

class ParseError(VnoipError, ValueError):
    """Malformed input file."""

    exit_code = 2

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class OrderingError(ParseError):
    """A repost references a parent that has not appeared yet."""


# Configuration errors

class ConfigError(VnoipError, ValueError):
    """Invalid configuration value or combination."""

    exit_code = 3


class SupercriticalityError(ConfigError):
    """Branching factor >= 1 would generate unbounded cascades."""


class HorizonError(ConfigError):
    """Prediction horizon not after the observation horizon."""


class RankError(ConfigError):
    """Requested embedding rank exceeds the node count."""


class EmbeddingConfigError(ConfigError):
    """Embedding dimension incompatible with the sampling layout."""


# Numeric errors

class NumericError(VnoipError, ArithmeticError):
    """Failure inside the numeric core."""

    exit_code = 4


class DimensionError(NumericError):
    """Operand extents do not match."""


class ShapeError(NumericError):
    """Operand has the wrong rank or shape for the operation."""


class DegenerateMaskError(NumericError):
    """An attention row has every position blocked."""


class NumericDomainError(NumericError):
    """Input outside the domain of an elementwise function."""


class TapeError(NumericError):
    """Misuse of the differentiation tape."""


class SolverBudgetError(NumericError):
    """An ODE solve needed more steps than allowed."""


class StiffnessError(SolverBudgetError):
    """Adaptive step size underflowed or the step budget ran out."""


class TrainingDivergedError(NumericError):
    """Loss became non-finite during training."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# Data errors

class DataError(VnoipError):
    """Input data violates a structural requirement."""

    exit_code = 5


class EmptyGraphError(DataError):
    """Graph has no nodes."""


class EmptySequenceError(DataError):
    """Cascade sequence or trajectory has no elements."""


class LeakageError(DataError):
    """Post-observation popularity was read on the inference path."""


class CheckpointError(DataError):
    """Checkpoint file is corrupt or does not match the model."""


class EmbeddingCacheError(DataError):
    """Embedding cache file is corrupt or has an unknown version."""
