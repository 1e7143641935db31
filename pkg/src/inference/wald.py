from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import stats

from constants import WALD_LEVEL
from errors import ValidationError
from inference.dataset import TrialCollection


@dataclass(frozen=True)
class WaldBand:
    times: np.ndarray
    u: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    level: float
    replicates: int


def wald_interval(values: np.ndarray, level: float = WALD_LEVEL) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise mean +/- z * sd / sqrt(R) over the first axis of a replicates x time array.

    Returns:
        (mean, lo, hi)
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] < 2:
        raise ValidationError(f"A Wald band needs at least 2 replicates, got {values.shape[0]}")
    if not 0.0 < level < 1.0:
        raise ValidationError(f"Confidence level must lie in (0, 1), got {level}")
    z = stats.norm.ppf(0.5 + level / 2.0)
    mean = values.mean(axis=0)
    half = z * values.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    return mean, mean - half, mean + half


def wald_band(collection: TrialCollection, j: int, level: float = WALD_LEVEL) -> WaldBand:
    mean, lo, hi = wald_interval(collection.curves(j), level)
    reference = collection.trials[0]
    return WaldBand(
        times=reference.times(),
        u=reference.u,
        mean=mean,
        lo=lo,
        hi=hi,
        level=level,
        replicates=len(collection),
    )
