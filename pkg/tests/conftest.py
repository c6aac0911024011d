import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.services.spin_state import SpinState  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_state(rng):
    """Factory for normalised random states on n spins."""

    def make(n_spins: int) -> SpinState:
        dim = 2 ** n_spins
        return SpinState.from_amplitudes(n_spins, rng.normal(size=dim) + 1j * rng.normal(size=dim))

    return make
