"""
Exception hierarchy. Every error carries the CLI exit code it maps to.
"""

from typing import Optional

from constants import EXIT_IO, EXIT_NUMERICAL, EXIT_PARSE, EXIT_VALIDATION


class WaveCanCohError(Exception):
    exit_code = 1


class ParseError(WaveCanCohError, ValueError):
    exit_code = EXIT_PARSE

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ValidationError(WaveCanCohError, ValueError):
    exit_code = EXIT_VALIDATION


class UnsupportedFamilyError(ValidationError):
    pass


class ScaleOverflowError(ValidationError):
    pass


class ScaleOutOfRangeError(ValidationError):
    pass


class InsufficientLengthError(ValidationError):
    pass


class InvalidLengthError(ValidationError):
    pass


class InvalidDataError(ValidationError):
    pass


class WindowTooLongError(ValidationError):
    pass


class ScaleCountMismatchError(ValidationError):
    pass


class GroupSplitError(ValidationError):
    pass


class LagTooLargeError(ValidationError):
    pass


class InvalidSpecError(ValidationError):
    pass


class EmptyBandError(ValidationError):
    pass


class WindowOutOfRangeError(ValidationError):
    pass


class EmptyGroupError(ValidationError):
    pass


class GridMismatchError(ValidationError):
    pass


class UnknownExperimentError(ValidationError):
    pass


class NumericalError(WaveCanCohError, ArithmeticError):
    exit_code = EXIT_NUMERICAL


class NotPSDError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass


class ConditioningError(NumericalError):
    """An auto-spectral block is not positive definite at (scale, k)."""

    def __init__(self, message: str, scale: Optional[int] = None, k: Optional[int] = None):
        self.scale = scale
        self.k = k
        if scale is not None:
            message = f"{message} (scale={scale}, k={k})"
        super().__init__(message)


class StorageError(WaveCanCohError, OSError):
    exit_code = EXIT_IO
