import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_hermitian(rng):
    def make(n: int) -> np.ndarray:
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return 0.5 * (X + X.conj().T)
    return make
