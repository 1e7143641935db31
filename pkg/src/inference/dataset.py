import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from cancoh import CancohField
from errors import EmptyGroupError, GridMismatchError, StorageError
from storage import read_cancoh_field

logger = logging.getLogger(__name__)


def same_grid(first: CancohField, second: CancohField) -> bool:
    return (
        first.scales == second.scales
        and first.T == second.T
        and first.bands == second.bands
        and np.array_equal(first.k, second.k)
        and np.isclose(first.fs, second.fs)
        and np.isclose(first.origin, second.origin)
    )


@dataclass
class TrialCollection:
    """Coherence fields of one condition, all on the same scale and time grid."""

    trials: List[CancohField]
    label: str = ""

    def __post_init__(self):
        if not self.trials:
            raise EmptyGroupError(f"Condition '{self.label}' has no trials")
        reference = self.trials[0]
        hash_ = reference.metadata.get("config_hash")
        for index, trial in enumerate(self.trials[1:], start=1):
            if not same_grid(reference, trial):
                raise GridMismatchError(f"Trial {index} of '{self.label}' is on a different grid than trial 0")
            if trial.metadata.get("config_hash") != hash_:
                raise GridMismatchError(f"Trial {index} of '{self.label}' was estimated with a different config")

    def __len__(self) -> int:
        return len(self.trials)

    @property
    def reference(self) -> CancohField:
        return self.trials[0]

    def curves(self, j: int) -> np.ndarray:
        """rho at scale j, stacked to shape (trials, time points)."""
        return np.stack([trial.curve(j) for trial in self.trials])

    def check_compatible(self, other: "TrialCollection") -> None:
        if not same_grid(self.reference, other.reference):
            raise GridMismatchError(f"Conditions '{self.label}' and '{other.label}' are on different grids")
        if self.reference.metadata.get("config_hash") != other.reference.metadata.get("config_hash"):
            raise GridMismatchError(f"Conditions '{self.label}' and '{other.label}' used different configs")


def load_trials(directory: Union[str, Path], label: str = None) -> TrialCollection:
    """Read every coherence field CSV (with its JSON sidecar) in a directory, in name order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise StorageError(f"Trial directory {directory} does not exist")
    paths = sorted(path for path in directory.glob("*.csv") if path.with_suffix(".json").exists())
    logger.info("Loading %d trials from %s", len(paths), directory)
    return TrialCollection([read_cancoh_field(path) for path in paths], label=label or directory.name)
