"""
Run configurations for the CLI commands.

Each command builds one frozen record, validates it before any computation
and embeds ``config_hash()`` in every file it writes. Input and output
paths are kept out of the hash, so trials estimated with the same
parameters share a hash.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from baseline import StftConfig, check_band
from cancoh import CancohConfig
from constants import (
    AR2_ALPHA,
    AR2_BETA,
    AR2_FS,
    CAUSAL_LAGS,
    CAUSAL_SURROGATE_DELAY,
    CHANGE_POINT,
    EXPERIMENTS,
    FIG2_LEFT_REPS,
    FIG2_RIGHT_REPS,
    LSP_BAND,
    PERM_N,
    PERM_WINDOW,
    WALD_LEVEL,
    WORKERS,
)
from errors import (
    GroupSplitError,
    InvalidLengthError,
    InvalidSpecError,
    UnknownExperimentError,
    ValidationError,
)
from storage import config_hash

MODELS = ("mvlsw", "ar2mix")
METHODS = ("wavecancoh", "lsp")
DIRECTIONS = ("xy", "yx")
PATH_FIELDS = ("input", "output", "spec_file", "dir_a", "dir_b")


def _hashable(config) -> Dict[str, Any]:
    data = asdict(config)
    for name in PATH_FIELDS:
        data.pop(name, None)
    return data


def _check_seed(seed: int) -> None:
    if seed < 0:
        raise ValidationError(f"Seed must be non-negative, got {seed}")


@dataclass(frozen=True)
class SimulateConfig:
    model: str
    T: int
    reps: int = 1
    seed: int = 0
    builtin: Optional[str] = "c1"
    spec_file: Optional[str] = None
    family: str = "haar"
    fs: Optional[float] = None
    origin: float = 0.0
    alpha: float = AR2_ALPHA
    beta: float = AR2_BETA
    change_point: float = CHANGE_POINT
    shared_delay: int = 0
    output: Optional[str] = None

    @property
    def sampling_rate(self) -> float:
        if self.fs is not None:
            return self.fs
        return AR2_FS if self.model == "ar2mix" else 1.0

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ValidationError(f"Unknown model '{self.model}', expected one of {MODELS}")
        if self.T < 2:
            raise InvalidLengthError(f"Series length must be at least 2, got {self.T}")
        if self.reps < 1:
            raise ValidationError(f"Replicate count must be at least 1, got {self.reps}")
        _check_seed(self.seed)
        if self.sampling_rate <= 0:
            raise ValidationError(f"Sampling rate must be positive, got {self.sampling_rate}")
        if self.model == "mvlsw" and self.spec_file is None and self.builtin != "c1":
            raise InvalidSpecError(f"Unknown builtin spec '{self.builtin}', expected 'c1'")
        if self.model == "ar2mix":
            if self.T % 2:
                raise InvalidLengthError(f"Series length must be even, got {self.T}")
            if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
                raise ValidationError("Shared weights alpha and beta must lie in [0, 1]")
            if not 0.0 < self.change_point < 1.0:
                raise ValidationError(f"Change point fraction must lie in (0, 1), got {self.change_point}")
            if self.shared_delay < 0:
                raise ValidationError(f"Shared delay must be non-negative, got {self.shared_delay}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        return config_hash({"command": "simulate", **_hashable(self)})


@dataclass(frozen=True)
class EstimateConfig:
    input: str
    output: Optional[str] = None
    P: Optional[int] = None
    method: str = "wavecancoh"
    cancoh: CancohConfig = field(default_factory=CancohConfig)
    lag: int = 0
    direction: str = "xy"
    band: Tuple[float, float] = LSP_BAND
    stft: StftConfig = field(default_factory=StftConfig)
    fs: Optional[float] = None
    origin: Optional[float] = None
    dump_lws: bool = False

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValidationError(f"Unknown method '{self.method}', expected one of {METHODS}")
        if self.direction not in DIRECTIONS:
            raise ValidationError(f"Unknown direction '{self.direction}', expected one of {DIRECTIONS}")
        if self.P is not None and self.P < 1:
            raise GroupSplitError(f"Group split P must be positive, got {self.P}")
        if self.lag < 0:
            raise ValidationError(f"Lag must be non-negative, got {self.lag}")
        if self.fs is not None and self.fs <= 0:
            raise ValidationError(f"Sampling rate must be positive, got {self.fs}")
        self.cancoh.validate()
        if self.method == "lsp":
            self.stft.validate()
            # the Nyquist bound is checked once the panel's sampling rate is known
            check_band(self.band, self.fs if self.fs is not None else 2.0 * self.band[1])
            if self.lag:
                raise ValidationError("The LSP baseline has no lagged variant")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["band"] = list(self.band)
        return data

    def config_hash(self) -> str:
        data = _hashable(self)
        if self.method == "wavecancoh":
            data.pop("stft")
            data.pop("band")
        else:
            data.pop("cancoh")
        return config_hash({"command": "estimate", **data})


@dataclass(frozen=True)
class PermTestConfig:
    dir_a: str
    dir_b: str
    scales: Tuple[int, ...]
    times: Tuple[float, ...]
    w: float = PERM_WINDOW
    n_perm: int = PERM_N
    seed: int = 0
    corrected: bool = False
    include_distribution: bool = False
    open_coarsest: bool = False
    output: Optional[str] = None

    def validate(self) -> None:
        if not self.scales or min(self.scales) < 1:
            raise ValidationError(f"Scales must be positive, got {self.scales}")
        if not self.times:
            raise ValidationError("At least one test time is required")
        if self.w < 0:
            raise ValidationError(f"Window width must be non-negative, got {self.w}")
        if self.n_perm < 1:
            raise ValidationError(f"Number of permutations must be at least 1, got {self.n_perm}")
        _check_seed(self.seed)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        return config_hash({"command": "permtest", **_hashable(self)})


@dataclass(frozen=True)
class ReplicateConfig:
    experiment: str
    reps: Optional[int] = None
    seed: int = 0
    T: int = 1024
    lags: Tuple[int, ...] = CAUSAL_LAGS
    shared_delay: int = CAUSAL_SURROGATE_DELAY
    cancoh: CancohConfig = field(default_factory=CancohConfig)
    stft: StftConfig = field(default_factory=lambda: StftConfig(fs=AR2_FS))
    band: Tuple[float, float] = LSP_BAND
    level: float = WALD_LEVEL
    workers: int = WORKERS
    output: Optional[str] = None

    @property
    def replicates(self) -> int:
        if self.reps is not None:
            return self.reps
        return FIG2_RIGHT_REPS if self.experiment in ("fig2-right", "causal-sweep") else FIG2_LEFT_REPS

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise UnknownExperimentError(f"Unknown experiment '{self.experiment}', expected one of {EXPERIMENTS}")
        if self.replicates < 2:
            raise ValidationError(f"Replicate count must be at least 2, got {self.replicates}")
        _check_seed(self.seed)
        if self.T < 16 or self.T % 2:
            raise InvalidLengthError(f"Series length must be even and at least 16, got {self.T}")
        if not self.lags or min(self.lags) < 0 or max(self.lags) >= self.T:
            raise ValidationError(f"Lags must lie in [0, T), got {self.lags}")
        if self.shared_delay < 0:
            raise ValidationError(f"Shared delay must be non-negative, got {self.shared_delay}")
        if not 0.0 < self.level < 1.0:
            raise ValidationError(f"Confidence level must lie in (0, 1), got {self.level}")
        if self.workers < 1:
            raise ValidationError(f"Worker count must be at least 1, got {self.workers}")
        self.cancoh.validate()
        if self.experiment == "fig2-right":
            self.stft.validate(self.T)
            check_band(self.band, self.stft.fs)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["reps"] = self.replicates
        return data

    def config_hash(self) -> str:
        data = _hashable(self)
        data["reps"] = self.replicates
        data.pop("workers")
        return config_hash({"command": "replicate", **data})
