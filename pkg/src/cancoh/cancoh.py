"""
Wavelet canonical coherence (WaveCanCoh) and its lagged variant.

For blocks (S_XX, S_XY, S_YY) the coherence is the largest eigenvalue of
S_XX^-1 S_XY S_YY^-1 S_YX. It is computed through the whitened cross block
K = L_X^-1 S_XY L_Y^-T, with L_X, L_Y the Cholesky factors of the auto
blocks: rho_raw = sigma_1^2, a = L_X^-T u_1, b = L_Y^-T v_1.
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from constants import (
    COARSEST_SCALE_DIVISOR,
    DEFAULT_FAMILY,
    DEFAULT_RELATIVE_EPSILON,
    NOISE_FLOOR,
    SUPPORTED_FAMILIES,
)
from errors import (
    ConditioningError,
    InvalidDataError,
    ScaleOutOfRangeError,
    UnsupportedFamilyError,
    ValidationError,
)
from lws import (
    LwsEstimate,
    default_half_width,
    estimate_lws,
    floor_to_noise,
    lagged_joint,
    partition,
    regularize,
)
from panel import TimeSeriesPanel
from wavelets import build_system, default_num_scales

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-10
BLOCK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class CancohConfig:
    """Estimation settings; None means "derive from the series length"."""

    family: str = DEFAULT_FAMILY
    num_scales: Optional[int] = None
    half_width: Optional[int] = None
    epsilon: Optional[float] = None
    relative_epsilon: float = DEFAULT_RELATIVE_EPSILON
    noise_floor: float = NOISE_FLOOR
    scales: Optional[Tuple[int, ...]] = None
    fs: float = 1.0
    origin: float = 0.0

    def validate(self) -> None:
        if self.family not in SUPPORTED_FAMILIES:
            raise UnsupportedFamilyError(f"Unsupported wavelet family '{self.family}'")
        if self.num_scales is not None and self.num_scales < 1:
            raise ValidationError(f"Number of scales must be at least 1, got {self.num_scales}")
        if self.half_width is not None and self.half_width < 0:
            raise ValidationError(f"Half-width must be non-negative, got {self.half_width}")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValidationError(f"Regularization floor must be non-negative, got {self.epsilon}")
        if self.relative_epsilon < 0:
            raise ValidationError(f"Relative regularization must be non-negative, got {self.relative_epsilon}")
        if self.noise_floor < 0:
            raise ValidationError(f"Noise floor must be non-negative, got {self.noise_floor}")
        if self.scales is not None and (not self.scales or min(self.scales) < 1):
            raise ScaleOutOfRangeError(f"Scales must be positive, got {self.scales}")
        if self.fs <= 0:
            raise ValidationError(f"Sampling rate must be positive, got {self.fs}")

    def resolve(self, T: int) -> "CancohConfig":
        self.validate()
        J = self.num_scales if self.num_scales is not None else default_num_scales(T)
        M = self.half_width if self.half_width is not None else default_half_width(T)
        if self.scales is not None:
            scales = tuple(sorted(set(self.scales)))
        else:
            scales = tuple(j for j in range(1, J + 1) if 2**j <= T / COARSEST_SCALE_DIVISOR) or (1,)
        if max(scales) > J:
            raise ScaleOutOfRangeError(f"Requested scales {scales} exceed J={J}")
        return CancohConfig(
            family=self.family,
            num_scales=J,
            half_width=M,
            epsilon=self.epsilon,
            relative_epsilon=self.relative_epsilon,
            noise_floor=self.noise_floor,
            scales=scales,
            fs=self.fs,
            origin=self.origin,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["scales"] = list(self.scales) if self.scales is not None else None
        return data


@dataclass(frozen=True)
class CancohPoint:
    rho: float
    rho_raw: float
    a: np.ndarray
    b: np.ndarray
    degenerate: bool = False
    spectrum: Optional[np.ndarray] = None
    epsilon: float = 0.0
    regularized: bool = False


@dataclass
class CancohField:
    """Coherence and canonical directions per requested scale and time index.

    Arrays are indexed [scale position, k]; ``scales[i]`` is the scale of row i.
    Rescaled time is u = k / T where T is the length of the X stream.
    Fourier-band fields set ``bands`` (Hz) and number their rows 1..n.
    """

    scales: Tuple[int, ...]
    k: np.ndarray
    T: int
    P: int
    Q: int
    rho: np.ndarray
    rho_raw: np.ndarray
    degenerate: np.ndarray
    a: np.ndarray
    b: np.ndarray
    spectrum: Optional[np.ndarray] = None
    epsilon: Optional[np.ndarray] = None
    floored: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    bands: Optional[Tuple[Tuple[float, float], ...]] = None

    @property
    def u(self) -> np.ndarray:
        return self.k / self.T

    @property
    def fs(self) -> float:
        return float(self.metadata.get("fs", 1.0))

    @property
    def origin(self) -> float:
        return float(self.metadata.get("origin", 0.0))

    def times(self) -> np.ndarray:
        """Time of each grid point in seconds."""
        return self.origin + self.k / self.fs

    def scale_index(self, j: int) -> int:
        try:
            return self.scales.index(j)
        except ValueError:
            raise ScaleOutOfRangeError(f"Scale {j} not in field scales {self.scales}") from None

    def curve(self, j: int) -> np.ndarray:
        return self.rho[self.scale_index(j)]

    def point(self, j: int, k: int) -> CancohPoint:
        i = self.scale_index(j)
        position = int(np.searchsorted(self.k, k))
        return CancohPoint(
            rho=float(self.rho[i, position]),
            rho_raw=float(self.rho_raw[i, position]),
            a=self.a[i, position],
            b=self.b[i, position],
            degenerate=bool(self.degenerate[i, position]),
            spectrum=None if self.spectrum is None else self.spectrum[i, position],
            epsilon=0.0 if self.epsilon is None else float(self.epsilon[i, position]),
            regularized=False if self.floored is None else bool(self.floored[i, position]),
        )


def _orient(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry positive; ties go to the lowest index."""
    lead = np.argmax(np.abs(vectors), axis=-1)
    signs = np.sign(np.take_along_axis(vectors, lead[..., None], axis=-1))
    signs[signs == 0] = 1.0
    return vectors * signs


def _first_not_pd(matrices: np.ndarray) -> Optional[int]:
    """Flat batch index of the first matrix that is not positive definite."""
    if matrices.ndim == 2:
        return None
    smallest = np.linalg.eigvalsh(matrices).reshape(-1, matrices.shape[-1])[:, 0]
    bad = np.flatnonzero(~(smallest > 0))
    return int(bad[0]) if len(bad) else None


def _cholesky(block: np.ndarray, name: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(block)
    except np.linalg.LinAlgError:
        error = ConditioningError(f"{name} is not positive definite")
        error.k = _first_not_pd(block)
        raise error from None


def whitened_cancoh(S_xx: np.ndarray, S_xy: np.ndarray, S_yy: np.ndarray):
    """Batched largest canonical pair; leading dimensions are batch dimensions.

    Returns:
        (squared singular values in decreasing order, a, b, degenerate flags)
    """
    L_x = _cholesky(S_xx, "S_XX")
    L_y = _cholesky(S_yy, "S_YY")

    left = np.linalg.solve(L_x, S_xy)
    K = np.swapaxes(np.linalg.solve(L_y, np.swapaxes(left, -1, -2)), -1, -2)
    U, sigma, Vt = np.linalg.svd(K)

    a = np.linalg.solve(np.swapaxes(L_x, -1, -2), U[..., :, :1])[..., 0]
    b = np.linalg.solve(np.swapaxes(L_y, -1, -2), np.swapaxes(Vt[..., :1, :], -1, -2))[..., 0]

    if sigma.shape[-1] > 1:
        degenerate = sigma[..., 0] - sigma[..., 1] <= TIE_TOLERANCE * sigma[..., 0]
    else:
        degenerate = np.zeros(sigma.shape[:-1], dtype=bool)
    return sigma**2, _orient(a), _orient(b), degenerate


def cancoh_at(S_XX: np.ndarray, S_XY: np.ndarray, S_YX: np.ndarray, S_YY: np.ndarray) -> CancohPoint:
    S_XX, S_XY, S_YX, S_YY = (np.asarray(m, dtype=float) for m in (S_XX, S_XY, S_YX, S_YY))
    P, Q = S_XY.shape
    if S_XX.shape != (P, P) or S_YY.shape != (Q, Q) or S_YX.shape != (Q, P):
        raise ValidationError("Block shapes are inconsistent")
    scale = max(1.0, float(np.max(np.abs(S_XY), initial=0.0)))
    if np.max(np.abs(S_YX - S_XY.T), initial=0.0) > BLOCK_TOLERANCE * scale:
        raise ValidationError("S_YX is not the transpose of S_XY")
    spectrum, a, b, degenerate = whitened_cancoh(S_XX, S_XY, S_YY)
    rho_raw = float(spectrum[0])
    return CancohPoint(
        rho=min(max(rho_raw, 0.0), 1.0),
        rho_raw=rho_raw,
        a=a,
        b=b,
        degenerate=bool(degenerate),
        spectrum=spectrum,
    )


@dataclass(frozen=True)
class DirectEigenResult:
    lambda_a: float
    lambda_b: float
    a: np.ndarray
    b: np.ndarray


def direct_eigen_cancoh(S_XX: np.ndarray, S_XY: np.ndarray, S_YX: np.ndarray, S_YY: np.ndarray) -> DirectEigenResult:
    """Leading eigenpairs of M_a = S_XX^-1 S_XY S_YY^-1 S_YX and M_b = S_YY^-1 S_YX S_XX^-1 S_XY."""
    M_a = np.linalg.solve(S_XX, S_XY) @ np.linalg.solve(S_YY, S_YX)
    M_b = np.linalg.solve(S_YY, S_YX) @ np.linalg.solve(S_XX, S_XY)

    def leading(M: np.ndarray, S: np.ndarray) -> Tuple[float, np.ndarray]:
        eigenvalues, eigenvectors = np.linalg.eig(M)
        top = int(np.argmax(eigenvalues.real))
        vector = eigenvectors[:, top].real
        vector = vector / np.sqrt(vector @ S @ vector)
        return float(eigenvalues[top].real), _orient(vector)

    lambda_a, a = leading(M_a, S_XX)
    lambda_b, b = leading(M_b, S_YY)
    return DirectEigenResult(lambda_a=lambda_a, lambda_b=lambda_b, a=a, b=b)


def regularized_lws(panel: TimeSeriesPanel, config: CancohConfig) -> Tuple[LwsEstimate, CancohConfig]:
    """Corrected, floored LWS field of a fused panel together with the resolved config.

    The noise floor runs before the epsilon floor.
    """
    resolved = config.resolve(panel.T)
    system = build_system(resolved.family, resolved.num_scales)
    estimate = estimate_lws(panel, system, resolved.half_width)
    estimate = floor_to_noise(estimate, resolved.noise_floor, resolved.scales)
    return regularize(estimate, resolved.epsilon, resolved.relative_epsilon, resolved.scales), resolved


def _estimate(
    panel: TimeSeriesPanel,
    config: CancohConfig,
    T_reference: int,
    lag: int,
    direction: str,
) -> CancohField:
    estimate, resolved = regularized_lws(panel, config)

    P, Q, T = panel.P, panel.Q, panel.T
    n_scales, rank = len(resolved.scales), min(P, Q)
    rho_raw = np.empty((n_scales, T))
    spectrum = np.empty((n_scales, T, rank))
    a = np.empty((n_scales, T, P))
    b = np.empty((n_scales, T, Q))
    degenerate = np.empty((n_scales, T), dtype=bool)

    for i, j in enumerate(resolved.scales):
        S_xx, S_xy, _, S_yy = partition(estimate.matrices(j), P)
        try:
            spectrum[i], a[i], b[i], degenerate[i] = whitened_cancoh(S_xx, S_xy, S_yy)
        except ConditioningError as e:
            raise ConditioningError(str(e), scale=j, k=e.k) from None
        rho_raw[i] = spectrum[i][:, 0]
        if degenerate[i].any():
            logger.warning("Scale %d: %d time points have tied leading canonical values", j, degenerate[i].sum())

    metadata = {
        "method": "wavecancoh",
        "family": resolved.family,
        "J": resolved.num_scales,
        "M": resolved.half_width,
        "epsilon": resolved.epsilon,
        "relative_epsilon": resolved.relative_epsilon,
        "noise_floor": resolved.noise_floor,
        "lag": lag,
        "direction": direction,
        "fs": resolved.fs,
        "origin": resolved.origin,
    }
    logger.debug("Estimated WaveCanCoh at scales %s over %d points", resolved.scales, T)
    return CancohField(
        scales=resolved.scales,
        k=np.arange(T),
        T=T_reference,
        P=P,
        Q=Q,
        rho=np.clip(rho_raw, 0.0, 1.0),
        rho_raw=rho_raw,
        degenerate=degenerate,
        a=a,
        b=b,
        spectrum=spectrum,
        epsilon=estimate.epsilon[[j - 1 for j in resolved.scales]],
        floored=estimate.floored[[j - 1 for j in resolved.scales]],
        metadata=metadata,
    )


def _check_groups(X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float).T).T
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    if X.shape[0] != Y.shape[0]:
        raise InvalidDataError(f"X and Y lengths differ: {X.shape[0]} != {Y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise InvalidDataError("Input panels contain non-finite values")
    return X, Y


def wavecancoh(X: np.ndarray, Y: np.ndarray, config: Optional[CancohConfig] = None) -> CancohField:
    return causal_wavecancoh(X, Y, 0, config)


def causal_wavecancoh(
    X: np.ndarray, Y: np.ndarray, h: int, config: Optional[CancohConfig] = None, direction: str = "xy"
) -> CancohField:
    """Coherence between X_t and Y_{t+h}; call with (Y, X) for the reverse direction."""
    config = config or CancohConfig()
    X, Y = _check_groups(X, Y)
    panel = lagged_joint(X, Y, h, fs=config.fs, origin=config.origin)
    return _estimate(panel, config, T_reference=X.shape[0], lag=h, direction=direction)


def wavecancoh_panel(panel: TimeSeriesPanel, config: Optional[CancohConfig] = None) -> CancohField:
    config = replace(config or CancohConfig(), fs=panel.fs, origin=panel.origin)
    return wavecancoh(panel.X, panel.Y, config)


def scale_means(field: CancohField, start: float = 0.0, stop: float = 1.0) -> List[float]:
    """Mean rho per scale over u in [start, stop]."""
    mask = (field.u >= start) & (field.u <= stop)
    return [float(field.rho[i, mask].mean()) for i in range(len(field.scales))]
