"""
Local wavelet spectral (LWS) matrix estimation.

    I_{l,k}  = d_{l,k} d_{l,k}^T                        raw periodogram
    I~_{l,k} = (2M+1)^-1 sum_{m=-M..M} I_{l,k+m}         rectangular smoothing, k wraps
    S^_{j,k} = sum_l (A^-1)_{jl} I~_{l,k}                Gram-inverse bias correction
    N_{j,k}  = sum_l |A^-1|_{jl} Q_l I~_{l,k} Q_l        sampling-noise scale of S^_{j,k}

Fields keep each D x D symmetric matrix as its packed upper triangle
(row-major), so a J x T field costs 8 * J * T * D(D+1)/2 bytes, twice that
while the noise field is attached.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy import fft, ndimage

from constants import (
    DEFAULT_RELATIVE_EPSILON,
    FLOOR_WARN_FRACTION,
    HALF_WIDTH_EXPONENT,
    NOISE_RANGE_TOLERANCE,
)
from errors import (
    GroupSplitError,
    InvalidDataError,
    LagTooLargeError,
    ScaleCountMismatchError,
    ValidationError,
    WindowTooLongError,
)
from panel import TimeSeriesPanel
from wavelets import WaveletSystem, ndwt

logger = logging.getLogger(__name__)


def triangle_indices(D: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(D)


def pack(matrices: np.ndarray) -> np.ndarray:
    D = matrices.shape[-1]
    iu, ju = triangle_indices(D)
    return 0.5 * (matrices[..., iu, ju] + matrices[..., ju, iu])


def unpack(values: np.ndarray, D: int) -> np.ndarray:
    iu, ju = triangle_indices(D)
    matrices = np.empty(values.shape[:-1] + (D, D))
    matrices[..., iu, ju] = values
    matrices[..., ju, iu] = values
    return matrices


def packed_size(D: int) -> int:
    return D * (D + 1) // 2


@dataclass(frozen=True)
class PeriodogramField:
    values: np.ndarray
    D: int
    kind: str = "raw"
    half_width: Optional[int] = None

    @property
    def J(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def matrices(self, j: Optional[int] = None) -> np.ndarray:
        """Full matrices, (J, T, D, D) or (T, D, D) for a single 1-based scale."""
        values = self.values if j is None else self.values[j - 1]
        return unpack(values, self.D)


@dataclass(frozen=True)
class LwsEstimate:
    """Corrected spectral field S^_{j,k}.

    ``epsilon[j-1, k]`` is the eigenvalue floor used at (j, k) and
    ``floored[j-1, k]`` tells whether any eigenvalue was lifted, by either
    the noise floor or the epsilon floor; both stay zero/False on scales
    that were not regularized. ``noise`` is the packed N_{j,k} field when
    the estimate came from coefficients.
    """

    values: np.ndarray
    D: int
    half_width: int
    epsilon: np.ndarray
    floored: np.ndarray
    noise: Optional[np.ndarray] = None

    @property
    def J(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def matrices(self, j: Optional[int] = None) -> np.ndarray:
        values = self.values if j is None else self.values[j - 1]
        return unpack(values, self.D)


def default_half_width(T: int) -> int:
    return int(math.ceil(T**HALF_WIDTH_EXPONENT / 2))


def raw_periodogram(d: np.ndarray) -> PeriodogramField:
    """Outer products of the (J, T, D) coefficient field."""
    d = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(d)):
        raise InvalidDataError("Wavelet coefficients contain non-finite values")
    iu, ju = triangle_indices(d.shape[-1])
    return PeriodogramField(values=d[..., iu] * d[..., ju], D=d.shape[-1], kind="raw")


def smooth(I: PeriodogramField, M: int) -> PeriodogramField:
    if M < 0:
        raise ValidationError(f"Half-width must be non-negative, got {M}")
    if 2 * M + 1 > I.T:
        raise WindowTooLongError(f"Smoothing window {2 * M + 1} is longer than the series ({I.T})")
    if M == 0:
        values = I.values.copy()
    else:
        values = ndimage.uniform_filter1d(I.values, size=2 * M + 1, axis=1, mode="wrap")
    return PeriodogramField(values=values, D=I.D, kind="smoothed", half_width=M)


def correct(Itilde: PeriodogramField, system: WaveletSystem) -> LwsEstimate:
    if Itilde.J != system.J:
        raise ScaleCountMismatchError(f"Periodogram has {Itilde.J} scales, wavelet system has {system.J}")
    values = np.tensordot(system.gram_inv, Itilde.values, axes=(1, 0))
    return LwsEstimate(
        values=values,
        D=Itilde.D,
        half_width=Itilde.half_width or 0,
        epsilon=np.zeros(values.shape[:2]),
        floored=np.zeros(values.shape[:2], dtype=bool),
    )


def relative_standard_error(d: np.ndarray, half_width: int) -> np.ndarray:
    """Relative standard error of the smoothed periodogram diagonal, per scale and channel.

    With r(tau) the circular autocorrelation of a coefficient sequence, the
    (2M+1)-point average of its squares has

        se^2 = (2/W) sum_{|tau|<W} (1 - |tau|/W) r(tau)^2,   W = 2M+1

    for Gaussian coefficients. Returns shape (J, D); channels with no energy
    at a scale get 0.
    """
    d = np.asarray(d, dtype=float)
    T = d.shape[1]
    W = 2 * half_width + 1
    if W > T:
        raise WindowTooLongError(f"Smoothing window {W} is longer than the series ({T})")
    autocovariance = fft.irfft(np.abs(fft.rfft(d, axis=1)) ** 2, n=T, axis=1)[:, :W]
    energy = autocovariance[:, :1]
    r = np.divide(autocovariance, energy, out=np.zeros_like(autocovariance), where=energy > 0)
    taper = 1.0 - np.arange(1, W) / W
    se2 = (2.0 / W) * (r[:, 0] ** 2 + 2.0 * np.einsum("w,jwd->jd", taper, r[:, 1:] ** 2))
    return np.sqrt(se2)


def noise_field(Itilde: PeriodogramField, se: np.ndarray, system: WaveletSystem) -> np.ndarray:
    """Packed N_{j,k}: the |A^-1|-weighted sum of error-scaled smoothed periodograms.

    Q_l = diag(sqrt(se[l-1])); every term and the sum are positive semi-definite.
    """
    if Itilde.J != system.J:
        raise ScaleCountMismatchError(f"Periodogram has {Itilde.J} scales, wavelet system has {system.J}")
    iu, ju = triangle_indices(Itilde.D)
    scaled = Itilde.values * np.sqrt(se[:, iu] * se[:, ju])[:, None, :]
    return np.tensordot(np.abs(system.gram_inv), scaled, axes=(1, 0))


def lift_to_noise(matrices: np.ndarray, noise: np.ndarray, level: float) -> Tuple[np.ndarray, np.ndarray]:
    """Lift S so that S - level * N is positive semi-definite on the range of N.

    In coordinates where N is the identity, eigenvalues of S below ``level``
    are raised to ``level``. Directions outside the range of N (exact linear
    dependence between channels, empty channels) are left alone, as are
    matrices whose N is zero. Matrices needing no lift come back untouched.

    Args:
        matrices: (..., D, D) symmetric estimates S
        noise: (..., D, D) positive semi-definite noise scales N
        level: multiple of N to lift to

    Returns:
        (lifted matrices, mask of matrices that changed)
    """
    matrices = np.asarray(matrices, dtype=float)
    n, U = np.linalg.eigh(noise)
    kept = n > NOISE_RANGE_TOLERANCE * np.maximum(n[..., -1:], 0.0)
    root = np.where(kept, np.sqrt(np.where(kept, n, 1.0)), 0.0)
    inv_root = np.where(kept, 1.0 / np.where(kept, root, 1.0), 0.0)

    rotated = np.swapaxes(U, -1, -2) @ matrices @ U
    G = inv_root[..., :, None] * rotated * inv_root[..., None, :]
    idx = np.arange(G.shape[-1])
    G[..., idx, idx] += np.where(kept, 0.0, 2.0 * level)
    G = 0.5 * (G + np.swapaxes(G, -1, -2))
    g, V = np.linalg.eigh(G)

    lifted = g[..., 0] < level
    basis = U @ (root[..., :, None] * V)
    lift = (basis * np.maximum(level - g, 0.0)[..., None, :]) @ np.swapaxes(basis, -1, -2)
    rebuilt = matrices + 0.5 * (lift + np.swapaxes(lift, -1, -2))
    return np.where(lifted[..., None, None], rebuilt, matrices), lifted


def floor_to_noise(S: LwsEstimate, level: float, scales: Optional[Iterable[int]] = None) -> LwsEstimate:
    """Keep S^_{j,k} at least ``level`` times its noise scale N_{j,k}.

    The Gram-inverse correction subtracts periodograms of neighbouring
    scales, so wherever the signal at scale j sits below the sampling noise
    S^_{j,k} is indefinite or nearly so, and whitening it turns noise into
    canonical coherence near 1. After the lift such points are dominated by
    N, whose coherence is that of a positively weighted periodogram sum.
    ``level`` 0 disables the step.
    """
    if level < 0:
        raise ValidationError(f"Noise floor must be non-negative, got {level}")
    if level == 0:
        return S
    if S.noise is None:
        raise ValidationError("Estimate carries no noise field; build it with estimate_lws")
    values = S.values.copy()
    floored = S.floored.copy()
    for j in (range(1, S.J + 1) if scales is None else scales):
        regular, lifted = lift_to_noise(S.matrices(j), unpack(S.noise[j - 1], S.D), level)
        values[j - 1] = pack(regular)
        floored[j - 1] |= lifted
        _report_floor("noise floor", j, lifted)
    return replace(S, values=values, floored=floored)


def _report_floor(kind: str, j: int, lifted: np.ndarray) -> None:
    fraction = lifted.mean() if lifted.size else 0.0
    if fraction > FLOOR_WARN_FRACTION:
        logger.warning(
            "Scale %d: %s lifted %d of %d time points (%.0f%%); coherence there reflects the floor",
            j,
            kind,
            lifted.sum(),
            lifted.size,
            100 * fraction,
        )
    elif lifted.any():
        logger.debug("Scale %d: %s lifted %d of %d time points", j, kind, lifted.sum(), lifted.size)


def floor_eigenvalues(matrices: np.ndarray, epsilon) -> Tuple[np.ndarray, np.ndarray]:
    """Lift eigenvalues below ``epsilon`` to ``epsilon``; matrices needing no lift come back untouched.

    Args:
        matrices: (..., D, D) symmetric
        epsilon: scalar or array broadcastable to matrices.shape[:-2]

    Returns:
        (floored matrices, mask of matrices that changed)
    """
    matrices = np.asarray(matrices, dtype=float)
    epsilon = np.broadcast_to(np.asarray(epsilon, dtype=float), matrices.shape[:-2])
    eigenvalues, eigenvectors = np.linalg.eigh(matrices)
    lifted = eigenvalues[..., 0] < epsilon
    clipped = np.maximum(eigenvalues, epsilon[..., None])
    rebuilt = (eigenvectors * clipped[..., None, :]) @ np.swapaxes(eigenvectors, -1, -2)
    rebuilt = 0.5 * (rebuilt + np.swapaxes(rebuilt, -1, -2))
    return np.where(lifted[..., None, None], rebuilt, matrices), lifted


def regularize(
    S: LwsEstimate,
    epsilon: Optional[float] = None,
    relative: float = DEFAULT_RELATIVE_EPSILON,
    scales: Optional[Iterable[int]] = None,
) -> LwsEstimate:
    """Floor eigenvalues of S^_{j,k}.

    With ``epsilon`` None the floor is ``relative`` times the mean absolute
    diagonal of each matrix, which is the mean diagonal whenever S^_{j,k} is PSD.
    Only the listed 1-based ``scales`` are touched (all by default).
    """
    if epsilon is not None and epsilon < 0:
        raise ValidationError(f"Regularization floor must be non-negative, got {epsilon}")
    values = S.values.copy()
    floors = S.epsilon.copy()
    floored = S.floored.copy()
    for j in (range(1, S.J + 1) if scales is None else scales):
        matrices = S.matrices(j)
        if epsilon is None:
            floor = relative * np.abs(np.diagonal(matrices, axis1=-2, axis2=-1)).mean(axis=-1)
        else:
            floor = np.full(S.T, float(epsilon))
        regular, lifted = floor_eigenvalues(matrices, floor)
        values[j - 1] = pack(regular)
        floors[j - 1] = floor
        floored[j - 1] |= lifted
        _report_floor("epsilon floor", j, lifted)
    return replace(S, values=values, epsilon=floors, floored=floored)


def partition(S: np.ndarray, P: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split (..., D, D) matrices into (S_XX, S_XY, S_YX, S_YY)."""
    D = S.shape[-1]
    if not 0 < P < D:
        raise GroupSplitError(f"Group split P={P} out of range for D={D}")
    return S[..., :P, :P], S[..., :P, P:], S[..., P:, :P], S[..., P:, P:]


def lagged_joint(
    X: np.ndarray, Y: np.ndarray, h: int, fs: float = 1.0, origin: float = 0.0
) -> TimeSeriesPanel:
    """Rows (X_t, Y_{t+h}) for t = 0 .. T-h-1."""
    X = np.atleast_2d(np.asarray(X, dtype=float).T).T
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    T = X.shape[0]
    if Y.shape[0] != T:
        raise InvalidDataError(f"X and Y lengths differ: {T} != {Y.shape[0]}")
    if h < 0 or h >= T:
        raise LagTooLargeError(f"Lag {h} must satisfy 0 <= h < T = {T}")
    return TimeSeriesPanel(np.hstack([X[: T - h], Y[h:]]), X.shape[1], fs=fs, origin=origin)


def estimate_lws(panel: TimeSeriesPanel, system: WaveletSystem, half_width: int) -> LwsEstimate:
    """NDWT, raw periodogram, smoothing and Gram-inverse correction (not yet regularized).

    The result carries the noise field used by floor_to_noise.
    """
    coefficients = ndwt(panel, system)
    smoothed = smooth(raw_periodogram(coefficients), half_width)
    noise = noise_field(smoothed, relative_standard_error(coefficients, half_width), system)
    return replace(correct(smoothed, system), noise=noise)
