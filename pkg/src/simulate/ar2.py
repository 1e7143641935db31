"""
Mixture of latent AR(2) sources with a regime switch in the mixing matrices.

Each latent channel follows Z_t = phi1 Z_{t-1} + phi2 Z_{t-2} + w_t with
phi1 = 2 cos(2 pi eta) e^{-s} and phi2 = -e^{-2s}, so its spectrum peaks
near eta cycles per sample. Before the change point the last (gamma)
component of X and Y blends a shared source with private ones.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from constants import AR2_ALPHA, AR2_BETA, AR2_ETA, AR2_FS, AR2_SHARPNESS, AR_BURN_IN, CHANGE_POINT
from errors import InvalidLengthError, InvalidSpecError, ValidationError
from seeding import spawn_generator

logger = logging.getLogger(__name__)

TOTAL_TOLERANCE = 1e-12

SHARED_STREAM, X_STREAM, Y_STREAM, MIXING_STREAM = 0, 1, 2, 3


def ar2_coefficients(eta: float, s: float) -> Tuple[float, float]:
    if not 0.0 < eta < 0.5:
        raise ValidationError(f"AR(2) frequency must lie in (0, 0.5) cycles/sample, got {eta}")
    if s <= 0.0:
        raise ValidationError(f"AR(2) sharpness must be positive, got {s}")
    return 2.0 * math.cos(2.0 * math.pi * eta) * math.exp(-s), -math.exp(-2.0 * s)


def is_stationary(phi1: float, phi2: float) -> bool:
    return abs(phi2) < 1.0 and phi2 + phi1 < 1.0 and phi2 - phi1 < 1.0


def simulate_ar2(eta: float, s: float, T: int, rng: np.random.Generator, burn_in: int = AR_BURN_IN) -> np.ndarray:
    """One AR(2) channel started at zero, with the first ``burn_in`` samples discarded."""
    phi1, phi2 = ar2_coefficients(eta, s)
    noise = rng.standard_normal(T + burn_in)
    return signal.lfilter([1.0], [1.0, -phi1, -phi2], noise)[burn_in:]


@dataclass(frozen=True)
class MixingTemplate:
    """Which latent components feed each observed channel, and each row's weight total."""

    support: np.ndarray
    totals: np.ndarray

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        support = np.asarray(self.support, dtype=bool)
        weights = np.zeros(support.shape)
        for row, mask in enumerate(support):
            count = int(mask.sum())
            if count == 1:
                weights[row, mask] = self.totals[row]
            elif count > 1:
                draws = rng.uniform(0.0, 1.0, size=count)
                weights[row, mask] = draws / draws.sum() * self.totals[row]
        return weights


def _template(rows: Sequence[Tuple[Sequence[int], float]], K: int) -> MixingTemplate:
    support = np.zeros((len(rows), K), dtype=bool)
    for r, (components, _) in enumerate(rows):
        support[r, [c - 1 for c in components]] = True
    return MixingTemplate(support=support, totals=np.array([total for _, total in rows]))


def default_ar2_templates(K: int = 5) -> Tuple[MixingTemplate, MixingTemplate, MixingTemplate, MixingTemplate]:
    """Supports and totals of B1, B2 (4 x K) and C1, C2 (3 x K); components are 1-based."""
    B1 = _template([((5,), 0.95), ((5,), 0.90), ((1, 2), 1.0), ((1, 2, 3), 1.0)], K)
    B2 = _template([((2, 3), 1.0), ((3,), 0.80), ((1,), 0.90), ((2, 3), 1.0)], K)
    C1 = _template([((5,), 0.95), ((5,), 0.90), ((2, 3), 1.0)], K)
    C2 = _template([((4,), 0.90), ((3,), 1.0), ((1,), 1.0)], K)
    return B1, B2, C1, C2


@dataclass(frozen=True)
class Ar2MixtureSpec:
    eta: np.ndarray
    sharp: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    alpha: float = AR2_ALPHA
    beta: float = AR2_BETA
    change_point: float = CHANGE_POINT
    fs: float = AR2_FS
    shared_delay: int = 0
    row_totals: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        K = len(self.eta)
        if len(self.sharp) != K:
            raise InvalidSpecError("eta and sharpness vectors differ in length")
        for eta, s in zip(self.eta, self.sharp):
            if not is_stationary(*ar2_coefficients(eta, s)):
                raise InvalidSpecError(f"AR(2) with eta={eta}, s={s} is not stationary")
        if self.B1.shape != self.B2.shape or self.C1.shape != self.C2.shape:
            raise InvalidSpecError("Regime mixing matrices must share their shapes")
        if self.B1.shape[1] != K or self.C1.shape[1] != K:
            raise InvalidSpecError(f"Mixing matrices must have K={K} columns")
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise InvalidSpecError("Shared weights alpha and beta must lie in [0, 1]")
        if not 0.0 < self.change_point < 1.0:
            raise InvalidSpecError(f"Change point fraction must lie in (0, 1), got {self.change_point}")
        if self.fs <= 0 or self.shared_delay < 0:
            raise InvalidSpecError("Sampling rate must be positive and shared delay non-negative")
        if self.row_totals is not None:
            for matrix, totals in zip((self.B1, self.B2, self.C1, self.C2), self.row_totals):
                if np.max(np.abs(matrix.sum(axis=1) - totals)) > TOTAL_TOLERANCE:
                    raise InvalidSpecError("Mixing matrix rows do not sum to their declared totals")

    @property
    def P(self) -> int:
        return self.B1.shape[0]

    @property
    def Q(self) -> int:
        return self.C1.shape[0]

    @property
    def K(self) -> int:
        return len(self.eta)


def default_ar2_spec(
    seed: int,
    alpha: float = AR2_ALPHA,
    beta: float = AR2_BETA,
    change_point: float = CHANGE_POINT,
    fs: float = AR2_FS,
    shared_delay: int = 0,
) -> Ar2MixtureSpec:
    """Reference five-source mixture design with the random mixing weights drawn from ``seed``."""
    templates = default_ar2_templates(len(AR2_ETA))
    rng = spawn_generator(seed, MIXING_STREAM)
    B1, B2, C1, C2 = (template.draw(rng) for template in templates)
    return Ar2MixtureSpec(
        eta=np.array(AR2_ETA),
        sharp=np.array(AR2_SHARPNESS),
        B1=B1,
        B2=B2,
        C1=C1,
        C2=C2,
        alpha=alpha,
        beta=beta,
        change_point=change_point,
        fs=fs,
        shared_delay=shared_delay,
        row_totals=tuple(template.totals for template in templates),
    )


def simulate_ar2_mixture(spec: Ar2MixtureSpec, T: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (X of shape (T, P), Y of shape (T, Q))."""
    if T < 2 or T % 2:
        raise InvalidLengthError(f"Series length must be even, got {T}")
    K = spec.K
    gamma = K - 1
    switch = int(round(spec.change_point * T))
    delay = spec.shared_delay

    shared = simulate_ar2(spec.eta[gamma], spec.sharp[gamma], T + delay, spawn_generator(seed, SHARED_STREAM, gamma))
    latent_x = np.column_stack(
        [simulate_ar2(spec.eta[k], spec.sharp[k], T, spawn_generator(seed, X_STREAM, k)) for k in range(K)]
    )
    latent_y = np.column_stack(
        [simulate_ar2(spec.eta[k], spec.sharp[k], T, spawn_generator(seed, Y_STREAM, k)) for k in range(K)]
    )

    # Y's shared input trails X's by ``delay`` samples
    latent_x[:switch, gamma] = spec.alpha * shared[delay : delay + switch] + (1 - spec.alpha) * latent_x[:switch, gamma]
    latent_y[:switch, gamma] = spec.beta * shared[:switch] + (1 - spec.beta) * latent_y[:switch, gamma]

    X = np.vstack([latent_x[:switch] @ spec.B1.T, latent_x[switch:] @ spec.B2.T])
    Y = np.vstack([latent_y[:switch] @ spec.C1.T, latent_y[switch:] @ spec.C2.T])
    logger.debug("Simulated AR(2) mixture with T=%d, seed=%d, switch at %d", T, seed, switch)
    return X, Y
