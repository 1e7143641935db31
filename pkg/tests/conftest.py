import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from simulate import builtin_spec_appendix_c1  # noqa: E402
from wavelets import build_system  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def c1_spec():
    return builtin_spec_appendix_c1()


@pytest.fixture(scope="session")
def haar_system():
    return build_system("haar", 2)


@pytest.fixture
def random_spd():
    """Factory for well-conditioned random symmetric positive definite matrices."""

    def make(rng: np.random.Generator, D: int, extra: int = 5) -> np.ndarray:
        G = rng.standard_normal((D, D + extra))
        return G @ G.T / (D + extra)

    return make
