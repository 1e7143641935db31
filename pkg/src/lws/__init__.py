from .lws import (
    LwsEstimate,
    PeriodogramField,
    correct,
    default_half_width,
    estimate_lws,
    floor_eigenvalues,
    floor_to_noise,
    lagged_joint,
    lift_to_noise,
    noise_field,
    pack,
    packed_size,
    partition,
    raw_periodogram,
    regularize,
    relative_standard_error,
    smooth,
    unpack,
)

__all__ = [
    "LwsEstimate",
    "PeriodogramField",
    "correct",
    "default_half_width",
    "estimate_lws",
    "floor_eigenvalues",
    "floor_to_noise",
    "lagged_joint",
    "lift_to_noise",
    "noise_field",
    "pack",
    "packed_size",
    "partition",
    "raw_periodogram",
    "regularize",
    "relative_standard_error",
    "smooth",
    "unpack",
]
