"""
Seeded random sub-streams.

Every stochastic routine takes an explicit non-negative seed. Sub-streams are
keyed by (seed, *keys) through ``numpy.random.SeedSequence`` and drive a
counter-based Philox generator, so a replicate or permutation draws the same
numbers no matter which worker runs it.
"""

import numpy as np

from errors import ValidationError


def spawn_generator(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0 or any(key < 0 for key in keys):
        raise ValidationError(f"Seeds and stream keys must be non-negative, got {(seed, *keys)}")
    sequence = np.random.SeedSequence([int(seed), *[int(key) for key in keys]])
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit child seed for (seed, *keys)."""
    if seed < 0 or any(key < 0 for key in keys):
        raise ValidationError(f"Seeds and stream keys must be non-negative, got {(seed, *keys)}")
    sequence = np.random.SeedSequence([int(seed), *[int(key) for key in keys]])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
