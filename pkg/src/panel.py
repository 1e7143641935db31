from dataclasses import dataclass

import numpy as np

from errors import GroupSplitError, InvalidDataError


@dataclass(frozen=True)
class TimeSeriesPanel:
    """A T x D real record whose first P channels form group X, the rest group Y.

    Attributes:
        values: array of shape (T, D)
        P: number of X channels, 0 < P < D
        fs: sampling rate in Hz
        origin: time of sample 0 in seconds
    """

    values: np.ndarray
    P: int
    fs: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidDataError(f"Panel must be 2-dimensional, got shape {values.shape}")
        if not 0 < self.P < values.shape[1]:
            raise GroupSplitError(f"Group split P={self.P} out of range for D={values.shape[1]}")
        if self.fs <= 0:
            raise InvalidDataError(f"Sampling rate must be positive, got {self.fs}")
        object.__setattr__(self, "values", values)

    @classmethod
    def fuse(cls, X: np.ndarray, Y: np.ndarray, fs: float = 1.0, origin: float = 0.0) -> "TimeSeriesPanel":
        X = np.atleast_2d(np.asarray(X, dtype=float).T).T
        Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
        if X.shape[0] != Y.shape[0]:
            raise InvalidDataError(f"X and Y lengths differ: {X.shape[0]} != {Y.shape[0]}")
        return cls(np.hstack([X, Y]), X.shape[1], fs=fs, origin=origin)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[1]

    @property
    def Q(self) -> int:
        return self.D - self.P

    @property
    def X(self) -> np.ndarray:
        return self.values[:, : self.P]

    @property
    def Y(self) -> np.ndarray:
        return self.values[:, self.P :]

    def times(self) -> np.ndarray:
        return self.origin + np.arange(self.T) / self.fs
