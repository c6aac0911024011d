"""Pure states of N spins on the computational basis.

Spin j (1-based) occupies bit j-1 of the basis index and up = 1, so
|up, down, down> is index 1 and |down, up, up> is index 6.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from app.core.config import config
from app.core.exceptions import DimensionMismatchError, InvalidParameterError

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10


def _check_register(n_spins: int) -> None:
    if n_spins < 1:
        raise InvalidParameterError(f"a register needs at least one spin, got {n_spins}")
    if n_spins > config.MAX_SPINS:
        raise InvalidParameterError(
            f"{n_spins} spins exceeds the configured maximum of {config.MAX_SPINS}"
        )


@dataclass(frozen=True)
class SpinConfig:
    """Orientation of each spin, spin 1 first; True is up."""

    orientations: Tuple[bool, ...]

    def __post_init__(self):
        if len(self.orientations) < 1:
            raise InvalidParameterError("a spin configuration needs at least one spin")
        orientations = tuple(self.orientations)
        bad = [o for o in orientations if not isinstance(o, (bool, np.bool_))]
        if bad:
            raise InvalidParameterError(f"orientations must be True (up) or False (down), got {bad[0]!r}")
        object.__setattr__(self, "orientations", tuple(bool(o) for o in orientations))

    @classmethod
    def parse(cls, text: str) -> "SpinConfig":
        """Build from a string such as 'udd' (u = up, d = down, spin 1 first)."""
        if not text or set(text) - {"u", "d"}:
            raise InvalidParameterError(f"configuration must be a string of 'u'/'d', got {text!r}")
        return cls(tuple(ch == "u" for ch in text))

    @classmethod
    def all_down(cls, n_spins: int) -> "SpinConfig":
        return cls((False,) * n_spins)

    @property
    def n_spins(self) -> int:
        return len(self.orientations)

    @property
    def excitations(self) -> int:
        return sum(self.orientations)

    def flipped(self, spin: int) -> "SpinConfig":
        values = list(self.orientations)
        values[spin - 1] = not values[spin - 1]
        return SpinConfig(tuple(values))

    def __str__(self) -> str:
        return "".join("u" if up else "d" for up in self.orientations)


@dataclass(frozen=True)
class SpinState:
    """Normalised amplitude vector of length 2^n_spins."""

    n_spins: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (2 ** self.n_spins,):
            raise DimensionMismatchError(
                f"{self.n_spins} spins need {2 ** self.n_spins} amplitudes, got shape {amplitudes.shape}"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameterError(f"state is not normalised (norm {norm:.15g})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_amplitudes(cls, n_spins: int, amplitudes) -> "SpinState":
        """Normalise an arbitrary nonzero vector into a state."""
        vector = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise InvalidParameterError("cannot normalise the zero vector")
        return cls(n_spins, vector / norm)

    @property
    def dimension(self) -> int:
        return 2 ** self.n_spins

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, config: SpinConfig) -> complex:
        return complex(self.amplitudes[basis_index(config)])


def basis_index(config: SpinConfig) -> int:
    return sum(1 << j for j, up in enumerate(config.orientations) if up)


def config_from_index(index: int, n_spins: int) -> SpinConfig:
    if not 0 <= index < 2 ** n_spins:
        raise InvalidParameterError(f"index {index} outside the {n_spins}-spin basis")
    return SpinConfig(tuple(bool((index >> j) & 1) for j in range(n_spins)))


def product_state(config: SpinConfig) -> SpinState:
    _check_register(config.n_spins)
    amplitudes = np.zeros(2 ** config.n_spins, dtype=complex)
    amplitudes[basis_index(config)] = 1.0
    return SpinState(config.n_spins, amplitudes)


def superposition(*configs: SpinConfig) -> SpinState:
    """Equal-weight superposition of distinct product configurations."""
    if not configs:
        raise InvalidParameterError("superposition needs at least one configuration")
    n_spins = configs[0].n_spins
    if any(c.n_spins != n_spins for c in configs):
        raise DimensionMismatchError("all configurations must have the same number of spins")
    _check_register(n_spins)
    amplitudes = np.zeros(2 ** n_spins, dtype=complex)
    for c in configs:
        amplitudes[basis_index(c)] += 1.0
    return SpinState.from_amplitudes(n_spins, amplitudes)


def ghz_state(m_spins: int, relative_phase: float = 0.0) -> SpinState:
    """(|down...down> + e^{i relative_phase} |up...up>) / sqrt(2)."""
    if m_spins < 2:
        raise InvalidParameterError(f"GHZ state needs at least two spins, got {m_spins}")
    _check_register(m_spins)
    amplitudes = np.zeros(2 ** m_spins, dtype=complex)
    amplitudes[0] = 1 / math.sqrt(2)
    amplitudes[-1] = np.exp(1j * relative_phase) / math.sqrt(2)
    return SpinState(m_spins, amplitudes)


def fidelity(a: SpinState, b: SpinState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError(
            f"fidelity between states of dimension {a.dimension} and {b.dimension}"
        )
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(1.0, abs(overlap) ** 2))


def populations(state: SpinState) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def spin_up_populations(state: SpinState) -> np.ndarray:
    """Probability that spin j is up, for j = 1..N."""
    tensor = populations(state).reshape((2,) * state.n_spins)
    # tensor axis 0 is the most significant bit, i.e. spin N
    result = np.empty(state.n_spins)
    for spin in range(1, state.n_spins + 1):
        axis = state.n_spins - spin
        result[spin - 1] = np.take(tensor, 1, axis=axis).sum()
    return result


def apply_local(state: SpinState, spins: Tuple[int, ...], matrix: np.ndarray) -> SpinState:
    """Apply a 2^k x 2^k operator to the listed spins, identity elsewhere.

    The local basis uses the same convention as the register: spins[0] is
    the least significant bit of the local index.
    """
    n, k = state.n_spins, len(spins)
    if len(set(spins)) != k or any(not 1 <= s <= n for s in spins):
        raise InvalidParameterError(f"spins {tuple(spins)} invalid for a {n}-spin register")
    operator = np.asarray(matrix, dtype=complex)
    if operator.shape != (2 ** k, 2 ** k):
        raise DimensionMismatchError(f"{k} spins need a {2 ** k}x{2 ** k} operator, got {operator.shape}")
    # reshaped operator axes run from the last listed spin to the first
    axes = [n - s for s in reversed(spins)]
    tensor = np.tensordot(
        operator.reshape((2,) * (2 * k)),
        state.amplitudes.reshape((2,) * n),
        axes=(list(range(k, 2 * k)), axes),
    )
    tensor = np.moveaxis(tensor, list(range(k)), axes)
    return SpinState(n, tensor.reshape(-1))


@lru_cache(maxsize=None)
def _blocks(n_spins: int) -> Tuple[Tuple[int, ...], ...]:
    counts = np.array([bin(i).count("1") for i in range(2 ** n_spins)])
    return tuple(tuple(int(i) for i in np.flatnonzero(counts == k)) for k in range(n_spins + 1))


def excitation_blocks(n_spins: int) -> Dict[int, List[int]]:
    """Basis indices grouped by number of up spins."""
    _check_register(n_spins)
    return {k: list(indices) for k, indices in enumerate(_blocks(n_spins))}
