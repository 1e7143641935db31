from .dataset import TrialCollection, load_trials, same_grid
from .permutation import (
    PermTestReport,
    format_cell,
    lower_median,
    perm_test,
    row_label,
    summary_table,
    window_mask,
    window_statistic,
)
from .wald import WaldBand, wald_band, wald_interval

__all__ = [
    "PermTestReport",
    "TrialCollection",
    "WaldBand",
    "format_cell",
    "load_trials",
    "lower_median",
    "perm_test",
    "row_label",
    "same_grid",
    "summary_table",
    "wald_band",
    "wald_interval",
    "window_mask",
    "window_statistic",
]
