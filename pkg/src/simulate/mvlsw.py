"""
Multivariate locally stationary wavelet (MvLSW) simulation.

Z_t = sum_j sum_k V_j(k/T) psi_j(t - k) z_{j,k}, t taken modulo T, where
V_j(u) V_j(u)^T = S_j(u) and z_{j,k} are independent standard Gaussian vectors.
"""

import bisect
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import fft, linalg

from errors import (
    InsufficientLengthError,
    InvalidSpecError,
    NotPSDError,
    RankDeficiencyError,
    ScaleOverflowError,
    ValidationError,
)
from panel import TimeSeriesPanel
from seeding import spawn_generator
from wavelets import WaveletSystem

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PiecewiseSpectrum:
    """S(u) constant on [breakpoints[i], breakpoints[i+1]); the first breakpoint is 0."""

    breakpoints: Tuple[float, ...]
    matrices: Tuple[np.ndarray, ...]

    def at(self, u: float) -> np.ndarray:
        return self.matrices[bisect.bisect_right(self.breakpoints, u) - 1]


@dataclass(frozen=True)
class LwsSpec:
    name: str
    P: int
    Q: int
    num_scales: int
    spectra: Dict[int, PiecewiseSpectrum] = field(default_factory=dict)

    def __post_init__(self):
        D = self.P + self.Q
        if self.P < 1 or self.Q < 1:
            raise InvalidSpecError(f"Group sizes must be positive, got P={self.P}, Q={self.Q}")
        for j, spectrum in self.spectra.items():
            if not 1 <= j <= self.num_scales:
                raise InvalidSpecError(f"Spectrum given at scale {j} outside 1..{self.num_scales}")
            if not spectrum.breakpoints or spectrum.breakpoints[0] != 0.0:
                raise InvalidSpecError(f"Scale {j}: breakpoints must start at 0")
            if list(spectrum.breakpoints) != sorted(spectrum.breakpoints):
                raise InvalidSpecError(f"Scale {j}: breakpoints must be increasing")
            if len(spectrum.breakpoints) != len(spectrum.matrices):
                raise InvalidSpecError(f"Scale {j}: one matrix per breakpoint is required")
            for matrix in spectrum.matrices:
                if matrix.shape != (D, D):
                    raise InvalidSpecError(f"Scale {j}: expected {D}x{D} matrices, got {matrix.shape}")
                if np.max(np.abs(matrix - matrix.T), initial=0.0) > SYMMETRY_TOLERANCE:
                    raise InvalidSpecError(f"Scale {j}: spectral matrix is not symmetric")
                if not np.array_equal(matrix[: self.P, self.P :], matrix[self.P :, : self.P].T):
                    raise InvalidSpecError(f"Scale {j}: cross blocks are not exact transposes")
                if np.linalg.eigvalsh(matrix)[0] < -PSD_TOLERANCE:
                    raise InvalidSpecError(f"Scale {j}: spectral matrix is not positive semi-definite")

    @property
    def D(self) -> int:
        return self.P + self.Q

    def matrix(self, j: int, u: float) -> np.ndarray:
        spectrum = self.spectra.get(j)
        if spectrum is None:
            return np.zeros((self.D, self.D))
        return spectrum.at(u)

    def blocks(self, j: int, u: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        S = self.matrix(j, u)
        P = self.P
        return S[:P, :P], S[:P, P:], S[P:, :P], S[P:, P:]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "P": self.P,
            "Q": self.Q,
            "num_scales": self.num_scales,
            "scales": {
                str(j): {
                    "breakpoints": list(spectrum.breakpoints),
                    "matrices": [matrix.tolist() for matrix in spectrum.matrices],
                }
                for j, spectrum in sorted(self.spectra.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LwsSpec":
        try:
            spectra = {
                int(j): PiecewiseSpectrum(
                    breakpoints=tuple(float(b) for b in entry["breakpoints"]),
                    matrices=tuple(np.array(m, dtype=float) for m in entry["matrices"]),
                )
                for j, entry in data.get("scales", {}).items()
            }
            return cls(
                name=str(data.get("name", "custom")),
                P=int(data["P"]),
                Q=int(data["Q"]),
                num_scales=int(data["num_scales"]),
                spectra=spectra,
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise InvalidSpecError(f"Malformed LWS spec: {e}") from e


@dataclass(frozen=True)
class MvlswRealization:
    panel: TimeSeriesPanel
    spec: LwsSpec
    seed: int


def transfer_from_spectrum(S: np.ndarray) -> np.ndarray:
    """Lower-triangular V with V V^T = S.

    Plain Cholesky first; singular matrices fall back to an eigen square root
    with negative eigenvalues floored at zero, re-triangularized by QR.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValidationError(f"Expected a square matrix, got shape {S.shape}")
    if np.max(np.abs(S - S.T), initial=0.0) > PSD_TOLERANCE:
        raise ValidationError("Spectral matrix is not symmetric")
    eigenvalues, eigenvectors = np.linalg.eigh(S)
    if eigenvalues.size and eigenvalues[0] < -PSD_TOLERANCE:
        raise NotPSDError(f"Spectral matrix has eigenvalue {eigenvalues[0]:.3g} < 0")

    try:
        return linalg.cholesky(S, lower=True)
    except linalg.LinAlgError:
        pass

    cutoff = PSD_TOLERANCE * max(1.0, float(eigenvalues[-1]))
    root = eigenvectors * np.sqrt(np.where(eigenvalues > cutoff, eigenvalues, 0.0))
    # root^T = Q R  =>  S = root root^T = R^T R with R^T lower triangular
    _, R = linalg.qr(root.T)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return (signs[:, None] * R).T


def _check_compatible(spec: LwsSpec, T: int, system: WaveletSystem) -> None:
    if spec.num_scales > system.J:
        raise ScaleOverflowError(f"Spec uses {spec.num_scales} scales but the system has J={system.J}")
    if T < 2**system.J:
        raise InsufficientLengthError(f"Series length {T} is shorter than 2^J = {2 ** system.J}")


def simulate_mvlsw(
    spec: LwsSpec,
    T: int,
    system: WaveletSystem,
    seed: int,
    fs: float = 1.0,
    origin: float = 0.0,
) -> MvlswRealization:
    _check_compatible(spec, T, system)
    u = np.arange(T) / T
    Z = np.zeros((T, spec.D))

    for j in range(1, spec.num_scales + 1):
        spectrum = spec.spectra.get(j)
        if spectrum is None:
            continue
        transfers = [transfer_from_spectrum(matrix) for matrix in spectrum.matrices]
        segment = np.searchsorted(np.asarray(spectrum.breakpoints), u, side="right") - 1

        innovations = spawn_generator(seed, j).standard_normal((T, spec.D))
        weighted = np.empty_like(innovations)
        for s, V in enumerate(transfers):
            rows = segment == s
            weighted[rows] = innovations[rows] @ V.T

        kernel = fft.rfft(system.periodized_wavelet(j, T))
        Z += fft.irfft(fft.rfft(weighted, axis=0) * kernel[:, None], n=T, axis=0)

    logger.debug("Simulated MvLSW '%s' with T=%d, seed=%d", spec.name, T, seed)
    return MvlswRealization(panel=TimeSeriesPanel(Z, spec.P, fs=fs, origin=origin), spec=spec, seed=seed)


def builtin_spec_appendix_c1() -> LwsSpec:
    """P=6, Q=4 spectrum non-zero only at scale 2, cross coupling c(u) = 1 then 2 from u = 0.5."""
    S_xx = 8.0 * np.eye(6)
    for a, b in [(1, 2), (1, 3), (2, 6), (4, 5)]:
        S_xx[a - 1, b - 1] = S_xx[b - 1, a - 1] = 1.0
    S_yy = 6.0 * np.eye(4)
    for a, b in [(1, 3), (2, 3), (2, 4)]:
        S_yy[a - 1, b - 1] = S_yy[b - 1, a - 1] = 1.0
    pattern = np.zeros((6, 4))
    for x, y in [(1, 1), (1, 4), (2, 2), (3, 4), (4, 1)]:
        pattern[x - 1, y - 1] = 1.0

    matrices = []
    for c in (1.0, 2.0):
        S = np.zeros((10, 10))
        S[:6, :6] = S_xx
        S[6:, 6:] = S_yy
        S[:6, 6:] = c * pattern
        S[6:, :6] = (c * pattern).T
        matrices.append(S)

    return LwsSpec(
        name="c1",
        P=6,
        Q=4,
        num_scales=2,
        spectra={2: PiecewiseSpectrum(breakpoints=(0.0, 0.5), matrices=tuple(matrices))},
    )


def true_cancoh_from_spec(spec: LwsSpec, j: int, u: float) -> float:
    """Largest eigenvalue of S_XX^-1 S_XY S_YY^-1 S_YX on the exact spec blocks."""
    S_xx, S_xy, S_yx, S_yy = spec.blocks(j, u)
    for name, block in (("S_XX", S_xx), ("S_YY", S_yy)):
        if np.linalg.matrix_rank(block) < block.shape[0]:
            raise RankDeficiencyError(f"{name} is singular at scale {j}, u={u}")
    M_a = np.linalg.solve(S_xx, S_xy) @ np.linalg.solve(S_yy, S_yx)
    return float(np.max(np.linalg.eigvals(M_a).real))


def population_curve(spec: LwsSpec, j: int, T: int, grid: Optional[Sequence[int]] = None) -> np.ndarray:
    """true_cancoh_from_spec evaluated at u = k/T."""
    ks = np.arange(T) if grid is None else np.asarray(grid)
    return np.array([true_cancoh_from_spec(spec, j, k / T) for k in ks])
