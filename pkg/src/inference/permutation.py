"""
Windowed permutation test on across-trial median coherence.

For a test time t* and window w the statistic is

    T = sum over grid times t in [t* - w/2, t* + w/2] of (median_A rho(j, t) - median_B rho(j, t))^2

Permutations reassign whole trials to two groups of the original sizes. The
p-value is the fraction of permuted statistics at or above the observed one,
so 0 is attainable; ``corrected=True`` gives (count + 1) / (n_perm + 1).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from constants import PERM_N, PERM_WINDOW
from errors import ValidationError, WindowOutOfRangeError
from inference.dataset import TrialCollection
from seeding import spawn_generator
from wavelets import scale_to_band

logger = logging.getLogger(__name__)

SIGNIFICANCE = 0.05


def lower_median(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Median taking the smaller central order statistic for even counts."""
    ordered = np.sort(values, axis=axis)
    return np.take(ordered, (ordered.shape[axis] - 1) // 2, axis=axis)


def window_statistic(group_a: np.ndarray, group_b: np.ndarray) -> float:
    return float(np.sum((lower_median(group_a) - lower_median(group_b)) ** 2))


def window_mask(times: np.ndarray, t_star: float, w: float, fs: float) -> np.ndarray:
    """Inclusive window [t* - w/2, t* + w/2] on the grid."""
    if w < 0:
        raise ValidationError(f"Window width must be non-negative, got {w}")
    tolerance = 1e-9 / fs
    start, end = t_star - w / 2.0, t_star + w / 2.0
    if start < times[0] - tolerance or end > times[-1] + tolerance:
        raise WindowOutOfRangeError(
            f"Window [{start:g}, {end:g}] s is outside the time grid [{times[0]:g}, {times[-1]:g}] s"
        )
    mask = (times >= start - tolerance) & (times <= end + tolerance)
    if not mask.any():
        raise WindowOutOfRangeError(f"Window [{start:g}, {end:g}] s holds no grid point")
    return mask


@dataclass
class PermTestReport:
    scale: int
    t_star: float
    w: float
    n_perm: int
    T_obs: float
    perm_stats: np.ndarray
    p_value: float
    seed: int
    median_difference: float
    window_points: int
    corrected: bool = False
    label_a: str = "A"
    label_b: str = "B"
    band: Optional[Sequence[float]] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def exceedances(self) -> int:
        return int(np.sum(self.perm_stats >= self.T_obs))

    @property
    def p_value_corrected(self) -> float:
        return (self.exceedances + 1) / (self.n_perm + 1)

    def to_dict(self, include_distribution: bool = False) -> Dict[str, Any]:
        data = {
            "scale": self.scale,
            "t_star": self.t_star,
            "w": self.w,
            "n_perm": self.n_perm,
            "T_obs": self.T_obs,
            "p_value": self.p_value,
            "p_value_corrected": self.p_value_corrected,
            "corrected": self.corrected,
            "seed": self.seed,
            "median_difference": self.median_difference,
            "window_points": self.window_points,
            "groups": {self.label_a: self.extra.get("size_a"), self.label_b: self.extra.get("size_b")},
            "band_hz": list(self.band) if self.band is not None else None,
        }
        if include_distribution:
            data["perm_stats"] = self.perm_stats.tolist()
        return data


def perm_test(
    groupA: TrialCollection,
    groupB: TrialCollection,
    j: int,
    t_star: float,
    w: float = PERM_WINDOW,
    n_perm: int = PERM_N,
    seed: int = 0,
    corrected: bool = False,
) -> PermTestReport:
    if n_perm < 1:
        raise ValidationError(f"Number of permutations must be at least 1, got {n_perm}")
    groupA.check_compatible(groupB)
    reference = groupA.reference
    times = reference.times()
    mask = window_mask(times, t_star, w, reference.fs)

    rho_a = groupA.curves(j)[:, mask]
    rho_b = groupB.curves(j)[:, mask]
    size_a = rho_a.shape[0]
    pooled = np.vstack([rho_a, rho_b])

    T_obs = window_statistic(rho_a, rho_b)
    perm_stats = np.empty(n_perm)
    for i in range(n_perm):
        order = spawn_generator(seed, i).permutation(pooled.shape[0])
        perm_stats[i] = window_statistic(pooled[order[:size_a]], pooled[order[size_a:]])

    exceed = int(np.sum(perm_stats >= T_obs))
    p_value = (exceed + 1) / (n_perm + 1) if corrected else exceed / n_perm

    nearest = int(np.argmin(np.abs(times - t_star)))
    difference = float(lower_median(groupA.curves(j)[:, nearest]) - lower_median(groupB.curves(j)[:, nearest]))

    band = None
    if reference.bands is not None:
        band = reference.bands[reference.scale_index(j)]
    elif "fs" in reference.metadata:
        band = scale_to_band(j, reference.fs)

    logger.debug("Scale %d, t*=%g: T_obs=%.4g, p=%.4g over %d permutations", j, t_star, T_obs, p_value, n_perm)
    return PermTestReport(
        scale=j,
        t_star=float(t_star),
        w=float(w),
        n_perm=n_perm,
        T_obs=T_obs,
        perm_stats=perm_stats,
        p_value=p_value,
        seed=seed,
        median_difference=difference,
        window_points=int(mask.sum()),
        corrected=corrected,
        label_a=groupA.label,
        label_b=groupB.label,
        band=band,
        extra={
            "size_a": len(groupA),
            "size_b": len(groupB),
            "method": reference.metadata.get("method", "wavecancoh"),
        },
    )


def row_label(j: int, band: Optional[Sequence[float]], coarsest: bool = False) -> str:
    """Table row label such as '5 (15.625-31.25Hz)'; the coarsest wavelet scale reads '7 (< 7.8125Hz)'."""
    if band is None:
        return str(j)
    lo, hi = band
    if coarsest:
        return f"{j} (< {hi:g}Hz)"
    return f"{j} ({lo:g}-{hi:g}Hz)"


def format_cell(difference: float, p_value: float) -> str:
    marker = "**" if p_value < SIGNIFICANCE else ""
    return f"{difference:.3f} ({p_value:.3f}{marker})"


def summary_table(reports: List[PermTestReport], open_coarsest: bool = False) -> pd.DataFrame:
    """Rows are scales (with band labels), columns test times, cells 'difference (p)'.

    With ``open_coarsest`` the largest wavelet scale is labelled as everything below its upper edge.
    """
    if not reports:
        return pd.DataFrame()
    scales = sorted({report.scale for report in reports})
    times = sorted({report.t_star for report in reports})
    bands = {report.scale: report.band for report in reports}
    wavelet_rows = all(report.extra.get("method") != "lsp" for report in reports)
    labels = {j: row_label(j, bands[j], open_coarsest and wavelet_rows and j == scales[-1]) for j in scales}

    table = pd.DataFrame(index=[labels[j] for j in scales], columns=times, dtype=object)
    table.index.name = "scale"
    for report in reports:
        table.loc[labels[report.scale], report.t_star] = format_cell(report.median_difference, report.p_value)
    table.columns = [f"{t:g}" for t in times]
    return table
