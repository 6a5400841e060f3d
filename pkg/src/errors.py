"""
Exception hierarchy for Vantage.
Every error knows the exit code the command line reports for it.
"""

from typing import Any, Optional

from constants import EXIT_INPUT_ERROR, EXIT_ALGORITHM_ERROR


class VantageError(Exception):
    """Base class for all Vantage errors."""

    exit_code = EXIT_ALGORITHM_ERROR


# =============================================================================
# INPUT ERRORS (exit 2)
# =============================================================================

class InputError(VantageError):
    """Input data is missing, empty, or malformed."""

    exit_code = EXIT_INPUT_ERROR


class DomainError(InputError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParseError(InputError):
    """A file could not be parsed."""

    def __init__(self, path: str, line: Optional[int], message: str):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


class ConfigError(InputError):
    """A run configuration is missing a section or field, or has a bad value."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


# =============================================================================
# ALGORITHMIC ERRORS (exit 3)
# =============================================================================

class DegenerateProjectionError(VantageError):
    """A world point projects through the camera center (lambda = 0)."""


class HorizonDegenerateError(VantageError):
    """A pixel ray never meets the requested plane in front of the camera."""


class DegenerateSystemError(VantageError):
    """A linear system has no usable coefficients."""


class DegenerateConfigurationError(VantageError):
    """Detections do not constrain the unknowns (rank-deficient system)."""

    def __init__(self, message: str, rank: int = 0, column_count: int = 0):
        self.rank = rank
        self.column_count = column_count
        super().__init__(message)


class ImplausibleGeometryError(VantageError):
    """A recovered camera height is not above the average person height."""


class ConsensusError(VantageError):
    """RANSAC found no model supported by enough inliers."""

    def __init__(self, message: str, best_candidate: Any = None):
        self.best_candidate = best_candidate
        super().__init__(message)


class DegenerateFitError(VantageError):
    """Too few or collinear correspondences for a rigid fit."""


class SingleClassError(VantageError):
    """A labelled set holds only positives or only negatives."""


class EmptySceneError(VantageError):
    """A synthetic scene has no visible persons."""
