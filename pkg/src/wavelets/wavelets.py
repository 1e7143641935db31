"""
Discrete non-decimated wavelet systems.

A system holds, for scales j = 1..J, the discrete wavelet sequence psi_j
obtained by cascading the dilated quadrature mirror filters, its
autocorrelation wavelet Psi_j, and the Gram matrix A of the autocorrelation
wavelets with its inverse. The NDWT treats the series as periodic.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np
import pywt
from scipy import fft

from constants import MAX_SCALES, MAX_WAVELET_SUPPORT, SUPPORTED_FAMILIES
from errors import (
    InsufficientLengthError,
    InvalidDataError,
    InvalidLengthError,
    ScaleOutOfRangeError,
    ScaleOverflowError,
    UnsupportedFamilyError,
    ValidationError,
)
from panel import TimeSeriesPanel

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class WaveletFilter:
    name: str
    lowpass: np.ndarray
    highpass: np.ndarray

    @property
    def length(self) -> int:
        return len(self.lowpass)

    @classmethod
    def from_family(cls, name: str) -> "WaveletFilter":
        if name not in SUPPORTED_FAMILIES:
            raise UnsupportedFamilyError(
                f"Unsupported wavelet family '{name}', expected one of {sorted(SUPPORTED_FAMILIES)}"
            )
        lowpass = np.array(pywt.Wavelet(SUPPORTED_FAMILIES[name]).rec_lo, dtype=float)
        # g[n] = (-1)^n h[L-1-n]
        highpass = lowpass[::-1] * (-1.0) ** np.arange(len(lowpass))
        return cls(name=name, lowpass=_frozen(lowpass), highpass=_frozen(highpass))


def support_length(filter_length: int, j: int) -> int:
    return (2**j - 1) * (filter_length - 1) + 1


def _upsample(taps: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return taps
    out = np.zeros((len(taps) - 1) * factor + 1)
    out[::factor] = taps
    return out


def _discrete_wavelets(wavelet_filter: WaveletFilter, J: int) -> List[np.ndarray]:
    # psi_j = (g upsampled by 2^{j-1}) * (h upsampled by 2^{j-2}) * ... * h
    wavelets = []
    scaling = np.array([1.0])
    for j in range(1, J + 1):
        factor = 2 ** (j - 1)
        wavelets.append(np.convolve(_upsample(wavelet_filter.highpass, factor), scaling))
        scaling = np.convolve(_upsample(wavelet_filter.lowpass, factor), scaling)
    return wavelets


@dataclass(frozen=True)
class WaveletSystem:
    """Non-decimated wavelets at J scales together with the bias-correction Gram matrix.

    ``psi[j-1]`` and ``acw[j-1]`` hold scale j. ``acw`` sequences are stored
    for lags -(L_j - 1) .. (L_j - 1), so lag 0 sits at index L_j - 1.
    """

    filter: WaveletFilter
    num_scales: int
    psi: Tuple[np.ndarray, ...]
    acw: Tuple[np.ndarray, ...]
    gram: np.ndarray
    gram_inv: np.ndarray

    @property
    def J(self) -> int:
        return self.num_scales

    def check_scale(self, j: int) -> None:
        if not 1 <= j <= self.num_scales:
            raise ScaleOutOfRangeError(f"Scale {j} outside 1..{self.num_scales}")

    def periodized_wavelet(self, j: int, T: int) -> np.ndarray:
        """psi_j wrapped onto a length-T circle."""
        self.check_scale(j)
        psi = self.psi[j - 1]
        wrapped = np.zeros(T)
        np.add.at(wrapped, np.arange(len(psi)) % T, psi)
        return wrapped


@lru_cache(maxsize=32)
def build_system(filter_name: str, J: int) -> WaveletSystem:
    if J < 1:
        raise ValidationError(f"Number of scales must be at least 1, got {J}")
    wavelet_filter = WaveletFilter.from_family(filter_name)
    if J > MAX_SCALES or support_length(wavelet_filter.length, J) > MAX_WAVELET_SUPPORT:
        raise ScaleOverflowError(
            f"{filter_name} at J={J} has support {support_length(wavelet_filter.length, J)}, "
            f"cap is J<={MAX_SCALES} and support<={MAX_WAVELET_SUPPORT}"
        )

    psi = _discrete_wavelets(wavelet_filter, J)
    acw = [np.correlate(p, p, mode="full") for p in psi]

    # A_jl = sum_tau Psi_j(tau) Psi_l(tau), aligned at tau = 0
    gram = np.zeros((J, J))
    for j in range(J):
        for l in range(j, J):
            half = min(len(psi[j]), len(psi[l])) - 1
            a = acw[j][len(psi[j]) - 1 - half : len(psi[j]) + half]
            b = acw[l][len(psi[l]) - 1 - half : len(psi[l]) + half]
            gram[j, l] = gram[l, j] = float(np.dot(a, b))
    gram_inv = np.linalg.inv(gram)

    logger.debug("Built %s system with J=%d, cond(A)=%.3g", filter_name, J, np.linalg.cond(gram))
    return WaveletSystem(
        filter=wavelet_filter,
        num_scales=J,
        psi=tuple(_frozen(p) for p in psi),
        acw=tuple(_frozen(a) for a in acw),
        gram=_frozen(gram),
        gram_inv=_frozen(gram_inv),
    )


def default_num_scales(T: int) -> int:
    return max(1, min(int(math.floor(math.log2(T))), MAX_SCALES))


def autocorrelation_wavelet(system: WaveletSystem, j: int) -> Tuple[np.ndarray, np.ndarray]:
    """Psi_j(tau) for tau = -(L_j - 1) .. (L_j - 1).

    Returns:
        (lags, values)
    """
    system.check_scale(j)
    values = system.acw[j - 1]
    half = (len(values) - 1) // 2
    return np.arange(-half, half + 1), values


def ndwt(panel: TimeSeriesPanel, system: WaveletSystem) -> np.ndarray:
    """Periodic non-decimated wavelet coefficients.

    d[j-1, k] = sum_t Z_t psi_j(t - k), t taken modulo T.

    Returns:
        array of shape (J, T, D)
    """
    values = panel.values
    T = panel.T
    if T < 2**system.J:
        raise InsufficientLengthError(f"Series length {T} is shorter than 2^J = {2 ** system.J}")
    if not np.all(np.isfinite(values)):
        raise InvalidDataError("Panel contains non-finite values")

    spectrum = fft.rfft(values, axis=0)
    coefficients = np.empty((system.J, T, panel.D))
    for j in range(1, system.J + 1):
        kernel = np.conj(fft.rfft(system.periodized_wavelet(j, T)))
        coefficients[j - 1] = fft.irfft(spectrum * kernel[:, None], n=T, axis=0)
    return coefficients


def scale_to_band(j: int, fs: float) -> Tuple[float, float]:
    """Approximate frequency interval in Hz covered by scale j."""
    if fs <= 0:
        raise ValidationError(f"Sampling rate must be positive, got {fs}")
    if j < 1:
        raise ScaleOutOfRangeError(f"Scale must be at least 1, got {j}")
    return fs / 2 ** (j + 1), fs / 2**j


def dwt_pyramid(signal: np.ndarray, system: WaveletSystem) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Decimated periodic filter-bank recursion.

    a_j[n] = sum_k h[k] a_{j-1}[2n - k],  d_j[n] = sum_k g[k] a_{j-1}[2n - k],  a_0 = signal.

    Returns:
        (approximations, details): lists indexed by level - 1
    """
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 1 or len(signal) % 2**system.J != 0:
        raise InvalidLengthError(
            f"Signal length {signal.shape} must be a 1-d multiple of 2^J = {2 ** system.J}"
        )
    h, g = system.filter.lowpass, system.filter.highpass
    taps = np.arange(len(h))

    approximations, details = [], []
    current = signal
    for _ in range(system.J):
        N = len(current)
        index = (2 * np.arange(N // 2)[:, None] - taps[None, :]) % N
        windows = current[index]
        approximations.append(windows @ h)
        details.append(windows @ g)
        current = approximations[-1]
    return approximations, details
