"""Classical lag-tau canonical correlation between two groups of channels."""

import logging
from dataclasses import dataclass

import numpy as np

from cancoh import cancoh_at
from constants import DEFAULT_RELATIVE_EPSILON
from errors import ConditioningError, InsufficientLengthError, InvalidDataError, RankDeficiencyError
from lws import floor_eigenvalues

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CcaResult:
    """``rho`` is the unsquared canonical correlation, ``eigenvalue`` its square."""

    rho: float
    a: np.ndarray
    b: np.ndarray
    eigenvalue: float
    tau: int


def lagged_covariances(X: np.ndarray, Y: np.ndarray, tau: int):
    """Centered sample blocks over the overlap of X_t and Y_{t-tau}.

    Returns:
        (S_XX, S_XY, S_YX, S_YY)
    """
    T = X.shape[0]
    if tau >= 0:
        x, y = X[tau:], Y[: T - tau]
    else:
        x, y = X[: T + tau], Y[-tau:]
    x = x - x.mean(axis=0)
    y = y - y.mean(axis=0)
    n = x.shape[0]
    S_xy = x.T @ y / n
    return x.T @ x / n, S_xy, S_xy.T, y.T @ y / n


def _floored(block: np.ndarray) -> np.ndarray:
    floor = DEFAULT_RELATIVE_EPSILON * np.trace(block) / block.shape[0]
    if floor <= 0:
        raise RankDeficiencyError("Sample covariance block is identically zero")
    return floor_eigenvalues(block, floor)[0]


def classical_cca(X: np.ndarray, Y: np.ndarray, tau: int = 0) -> CcaResult:
    X = np.atleast_2d(np.asarray(X, dtype=float).T).T
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    T = X.shape[0]
    if Y.shape[0] != T:
        raise InvalidDataError(f"X and Y lengths differ: {T} != {Y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise InvalidDataError("Input panels contain non-finite values")
    if T - abs(tau) <= X.shape[1] + Y.shape[1]:
        raise InsufficientLengthError(
            f"Overlap T-|tau| = {T - abs(tau)} must exceed P+Q = {X.shape[1] + Y.shape[1]}"
        )

    S_xx, S_xy, S_yx, S_yy = lagged_covariances(X, Y, tau)
    try:
        point = cancoh_at(S_xx, S_xy, S_yx, S_yy)
    except ConditioningError:
        logger.debug("Sample covariance is singular at tau=%d, flooring eigenvalues", tau)
        try:
            point = cancoh_at(_floored(S_xx), S_xy, S_yx, _floored(S_yy))
        except ConditioningError as e:
            raise RankDeficiencyError(f"Degenerate sample covariance at tau={tau}: {e}") from None

    eigenvalue = point.rho
    return CcaResult(rho=float(np.sqrt(eigenvalue)), a=point.a, b=point.b, eigenvalue=eigenvalue, tau=tau)
