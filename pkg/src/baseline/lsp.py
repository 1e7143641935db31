"""
Fourier baseline: localized canonical coherence on a frequency band from
short-time Fourier spectra (LSP).

Each window of ``window_len`` samples, starting every ``hop`` samples, is
demeaned, multiplied by a Gaussian taper and transformed. The outer products
of the coefficients are smoothed across neighbouring windows with a Gaussian
kernel, averaged over the band and handed to the same whitened solver as the
wavelet path, using the real part of the band-averaged matrices.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import fft, ndimage, signal

from cancoh import CancohField, whitened_cancoh
from constants import DEFAULT_RELATIVE_EPSILON, STFT_HOP, STFT_SIGMA_DIVISOR, STFT_WINDOW
from errors import ConditioningError, EmptyBandError, InvalidDataError, ValidationError, WindowTooLongError
from lws import floor_eigenvalues, partition
from panel import TimeSeriesPanel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StftConfig:
    window_len: int = STFT_WINDOW
    hop: int = STFT_HOP
    gaussian_sigma: Optional[float] = None
    fs: float = 1.0
    relative_epsilon: float = DEFAULT_RELATIVE_EPSILON

    @property
    def sigma(self) -> float:
        return self.gaussian_sigma if self.gaussian_sigma is not None else self.window_len / STFT_SIGMA_DIVISOR

    def validate(self, T: Optional[int] = None) -> None:
        if self.window_len < 2:
            raise ValidationError(f"STFT window must hold at least 2 samples, got {self.window_len}")
        if self.hop < 1:
            raise ValidationError(f"STFT hop must be at least 1, got {self.hop}")
        if self.sigma <= 0:
            raise ValidationError(f"Gaussian width must be positive, got {self.sigma}")
        if self.fs <= 0:
            raise ValidationError(f"Sampling rate must be positive, got {self.fs}")
        if T is not None and self.window_len > T:
            raise WindowTooLongError(f"STFT window {self.window_len} is longer than the series ({T})")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class LocalSpectrum:
    """Hermitian spectral matrices on a (window center, frequency) grid.

    Attributes:
        centers: window centers in samples
        frequencies: one-sided bin frequencies in Hz, 0..fs/2
        values: complex array of shape (len(centers), len(frequencies), D, D)
    """

    centers: np.ndarray
    frequencies: np.ndarray
    values: np.ndarray
    window_len: int
    gaussian_sigma: float
    hop: int
    fs: float

    @property
    def D(self) -> int:
        return self.values.shape[-1]

    def band_mask(self, band: Tuple[float, float]) -> np.ndarray:
        lo, hi = band
        return (self.frequencies >= lo) & (self.frequencies <= hi)


def stft_spectrum(
    panel,
    window_len: int = STFT_WINDOW,
    gaussian_sigma: Optional[float] = None,
    hop: int = STFT_HOP,
    fs: Optional[float] = None,
) -> LocalSpectrum:
    """Smoothed short-time Fourier spectral matrices of a T x D panel."""
    if isinstance(panel, TimeSeriesPanel):
        values, fs = panel.values, fs if fs is not None else panel.fs
    else:
        values = np.atleast_2d(np.asarray(panel, dtype=float).T).T
    fs = 1.0 if fs is None else fs
    config = StftConfig(window_len=window_len, hop=hop, gaussian_sigma=gaussian_sigma, fs=fs)
    config.validate(values.shape[0])
    if not np.all(np.isfinite(values)):
        raise InvalidDataError("Panel contains non-finite values")

    T = values.shape[0]
    starts = np.arange(0, T - window_len + 1, hop)
    taper = signal.windows.gaussian(window_len, std=config.sigma, sym=True)
    segments = values[starts[:, None] + np.arange(window_len)[None, :]]
    segments = segments - segments.mean(axis=1, keepdims=True)
    coefficients = fft.rfft(segments * taper[None, :, None], axis=1)

    # one-sided density; DC and (even-length) Nyquist bins are not doubled
    weights = np.full(coefficients.shape[1], 2.0)
    weights[0] = 1.0
    if window_len % 2 == 0:
        weights[-1] = 1.0
    weights /= fs * np.sum(taper**2)
    raw = weights[None, :, None, None] * coefficients[..., :, None] * np.conj(coefficients[..., None, :])

    smoothing = config.sigma / hop
    smoothed = ndimage.gaussian_filter1d(raw.real, smoothing, axis=0, mode="nearest") + 1j * ndimage.gaussian_filter1d(
        raw.imag, smoothing, axis=0, mode="nearest"
    )
    logger.debug("STFT spectrum: %d centers, %d bins, D=%d", len(starts), coefficients.shape[1], values.shape[1])
    return LocalSpectrum(
        centers=starts + window_len // 2,
        frequencies=fft.rfftfreq(window_len, d=1.0 / fs),
        values=smoothed,
        window_len=window_len,
        gaussian_sigma=config.sigma,
        hop=hop,
        fs=fs,
    )


def check_band(band: Tuple[float, float], fs: float) -> Tuple[float, float]:
    lo, hi = float(band[0]), float(band[1])
    if not 0.0 < lo < hi <= fs / 2:
        raise ValidationError(f"Band [{lo}, {hi}] Hz must satisfy 0 < lo < hi <= fs/2 = {fs / 2}")
    return lo, hi


def lsp_cancoh(
    X: np.ndarray,
    Y: np.ndarray,
    band: Tuple[float, float],
    stft_config: Optional[StftConfig] = None,
    origin: float = 0.0,
) -> CancohField:
    """Band coherence per window center, in the CancohField layout with one row."""
    config = stft_config or StftConfig()
    lo, hi = check_band(band, config.fs)
    panel = TimeSeriesPanel.fuse(X, Y, fs=config.fs, origin=origin)
    spectrum = stft_spectrum(panel, config.window_len, config.gaussian_sigma, config.hop, config.fs)
    mask = spectrum.band_mask((lo, hi))
    if not mask.any():
        raise EmptyBandError(f"No frequency bin falls in [{lo}, {hi}] Hz at window length {config.window_len}")

    averaged = spectrum.values[:, mask].mean(axis=1).real
    floor = np.clip(config.relative_epsilon * np.trace(averaged, axis1=-2, axis2=-1) / panel.D, 0.0, None)
    regular, floored = floor_eigenvalues(averaged, floor)
    S_xx, S_xy, _, S_yy = partition(regular, panel.P)
    try:
        squared, a, b, degenerate = whitened_cancoh(S_xx, S_xy, S_yy)
    except ConditioningError as e:
        k = None if e.k is None else int(spectrum.centers[e.k])
        raise ConditioningError(f"{e} in band [{lo}, {hi}] Hz", scale=0, k=k) from None

    rho_raw = squared[:, 0]
    metadata = {
        "method": "lsp",
        "band_lo_hz": lo,
        "band_hi_hz": hi,
        "bins": int(mask.sum()),
        "stft": config.to_dict() | {"gaussian_sigma": config.sigma},
        "fs": config.fs,
        "origin": origin,
        "lag": 0,
        "direction": "xy",
    }
    return CancohField(
        scales=(1,),
        k=spectrum.centers,
        T=panel.T,
        P=panel.P,
        Q=panel.Q,
        rho=np.clip(rho_raw, 0.0, 1.0)[None],
        rho_raw=rho_raw[None],
        degenerate=degenerate[None],
        a=a[None],
        b=b[None],
        spectrum=squared[None],
        epsilon=floor[None],
        floored=floored[None],
        metadata=metadata,
        bands=((lo, hi),),
    )
