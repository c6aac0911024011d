"""Cyclic chiral Hamiltonian on a spin triple and its exact evolution.

H = i kappa (s+_q s-_p + s+_r s-_q + s+_p s-_r) + h.c. with s+ = |up><down|.
In the one-excitation sector <up at q|H|up at p> = i kappa, which moves an up
spin p -> q -> r -> p and reaches the next site exactly at T = 2 pi / (3 sqrt(3) kappa).
Two up spins see -H in the hole picture, so their down spin moves the other way.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.config import config
from app.core.exceptions import DimensionMismatchError, InvalidParameterError
from app.models.models import ChiralCoupling
from app.services.spin_state import SpinConfig, SpinState, apply_local, excitation_blocks

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
ROOT3 = math.sqrt(3.0)
POPULATION_COLUMNS = ("time", "t_over_T", "p_udd", "p_dud", "p_ddu", "analytic_udd", "analytic_dud", "analytic_ddu")


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Hermitian matrix on n_spins spins, tensored with a cavity when photon_cutoff is set."""

    entries: np.ndarray = field(repr=False)
    n_spins: int
    photon_cutoff: Optional[int] = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        expected = 2 ** self.n_spins * (1 if self.photon_cutoff is None else self.photon_cutoff + 1)
        if entries.shape != (expected, expected):
            raise DimensionMismatchError(f"expected a {expected}x{expected} matrix, got {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def is_hermitian(self, atol: float = HERMITIAN_TOL) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, rtol=0.0, atol=atol))


@dataclass(frozen=True)
class ChiralEigensystem:
    """Eigenpairs of the one-excitation block, ordered (0, +sqrt3 kappa, -sqrt3 kappa).

    Eigenvectors are columns in the (|udd>, |dud>, |ddu>) basis with a real
    positive first component.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_kappa(kappa: float) -> None:
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")


def _check_triple(coupling: ChiralCoupling, n_spins: int) -> None:
    if max(coupling.triple) > n_spins:
        raise InvalidParameterError(
            f"triple {coupling.triple} outside the {n_spins}-spin register"
        )


def build_chiral_hamiltonian(coupling: ChiralCoupling, n_spins: int) -> HamiltonianMatrix:
    _check_triple(coupling, n_spins)
    if n_spins > config.DENSE_MAX_SPINS:
        raise InvalidParameterError(
            f"dense Hamiltonians are limited to {config.DENSE_MAX_SPINS} spins; use evolve_local"
        )
    dim = 2 ** n_spins
    entries = np.zeros((dim, dim), dtype=complex)
    indices = np.arange(dim)
    p, q, r = coupling.triple
    for src, dst in ((p, q), (q, r), (r, p)):
        src_bit, dst_bit = 1 << (src - 1), 1 << (dst - 1)
        # s+_dst s-_src acts where src is up and dst is down
        start = indices[((indices & src_bit) != 0) & ((indices & dst_bit) == 0)]
        end = start ^ src_bit ^ dst_bit
        entries[end, start] += 1j * coupling.kappa
        entries[start, end] += -1j * coupling.kappa
    return HamiltonianMatrix(entries, n_spins)


def hermitian_propagator(matrix: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) from the eigendecomposition of a Hermitian matrix."""
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return (eigenvectors * np.exp(-1j * eigenvalues * t)) @ eigenvectors.conj().T


def evolve_exact(
    state: SpinState,
    h: HamiltonianMatrix,
    t: float,
    blocks: Optional[Dict[int, List[int]]] = None,
) -> SpinState:
    """exp(-i H t)|state>, diagonalising each block separately when blocks are given."""
    if h.photon_cutoff is not None or h.dimension != state.dimension:
        raise DimensionMismatchError(
            f"state of dimension {state.dimension} cannot evolve under a {h.dimension}-dimensional Hamiltonian"
        )
    if not h.is_hermitian():
        raise InvalidParameterError("evolve_exact needs a Hermitian Hamiltonian")
    if t == 0:
        return state
    if blocks is None:
        return SpinState(state.n_spins, hermitian_propagator(h.entries, t) @ state.amplitudes)

    weight = np.sum(np.abs(h.entries) ** 2)
    in_blocks = sum(np.sum(np.abs(h.entries[np.ix_(idx, idx)]) ** 2) for idx in blocks.values())
    if not math.isclose(in_blocks, weight, rel_tol=0.0, abs_tol=1e-20 + 1e-14 * weight):
        raise InvalidParameterError("Hamiltonian is not block-diagonal in the given blocks")
    evolved = np.zeros_like(state.amplitudes)
    for idx in blocks.values():
        sub = h.entries[np.ix_(idx, idx)]
        evolved[idx] = hermitian_propagator(sub, t) @ state.amplitudes[idx]
    return SpinState(state.n_spins, evolved)


def evolve_local(state: SpinState, coupling: ChiralCoupling, t: float) -> SpinState:
    """Apply the triple's 8x8 propagator on its tensor factor only."""
    local = build_chiral_hamiltonian(ChiralCoupling(kappa=coupling.kappa, triple=(1, 2, 3)), 3)
    return apply_local(state, coupling.triple, hermitian_propagator(local.entries, t))


def evolve_chiral(state: SpinState, coupling: ChiralCoupling, t: float) -> SpinState:
    """Dense block-wise evolution for small registers, local evolution above the dense limit."""
    _check_triple(coupling, state.n_spins)
    if state.n_spins > config.DENSE_MAX_SPINS:
        return evolve_local(state, coupling, t)
    h = build_chiral_hamiltonian(coupling, state.n_spins)
    return evolve_exact(state, h, t, blocks=excitation_blocks(state.n_spins))


def rotation_period(kappa: float) -> float:
    """T = 2 pi / (3 sqrt(3) kappa), one step of the chiral rotation."""
    _check_kappa(kappa)
    return 2 * math.pi / (3 * ROOT3 * kappa)


def analytic_three_spin_amplitudes(t: float, kappa: float) -> Tuple[complex, complex, complex]:
    """Amplitudes on (|udd>, |dud>, |ddu>) starting from |udd>."""
    _check_kappa(kappa)
    phase = ROOT3 * kappa * t
    return (
        complex((1 + 2 * math.cos(phase)) / 3),
        complex((1 + 2 * math.cos(phase - 2 * math.pi / 3)) / 3),
        complex((1 + 2 * math.cos(phase + 2 * math.pi / 3)) / 3),
    )


def analytic_two_excitation_amplitudes(t: float, kappa: float) -> Tuple[complex, complex, complex]:
    """Amplitudes on (|duu>, |udu>, |uud>) starting from |duu>.

    Flipping every spin maps this sector onto the one-excitation sector with
    H -> -H, so the closed form is the one-excitation one run backwards.
    """
    return analytic_three_spin_amplitudes(-t, kappa)


def chiral_eigensystem(kappa: float) -> ChiralEigensystem:
    _check_kappa(kappa)
    h = build_chiral_hamiltonian(ChiralCoupling(kappa=kappa), 3).entries
    one_excitation = [1, 2, 4]
    eigenvalues, eigenvectors = np.linalg.eigh(h[np.ix_(one_excitation, one_excitation)])
    # eigh sorts ascending (-sqrt3 k, 0, +sqrt3 k)
    order = [1, 2, 0]
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]
    phases = eigenvectors[0] / np.abs(eigenvectors[0])
    return ChiralEigensystem(eigenvalues=eigenvalues, eigenvectors=eigenvectors / phases)


def rotate_configuration(config_: SpinConfig, triple: Tuple[int, int, int], steps: int) -> SpinConfig:
    """Classical image of `config_` after `steps` rotation periods on `triple`."""
    bits = [config_.orientations[s - 1] for s in triple]
    ups = sum(bits)
    if ups == 1:
        moved = (bits.index(True) + steps) % 3
        new_bits = [i == moved for i in range(3)]
    elif ups == 2:
        moved = (bits.index(False) - steps) % 3
        new_bits = [i != moved for i in range(3)]
    else:
        return config_
    values = list(config_.orientations)
    for spin, up in zip(triple, new_bits):
        values[spin - 1] = up
    return SpinConfig(tuple(values))


def population_series(kappa: float, periods: float, samples: int) -> List[List[float]]:
    """Rows (t, t/T, simulated and analytic populations of |udd>, |dud>, |ddu>) over [0, periods*T]."""
    if samples < 2 or not periods > 0:
        raise InvalidParameterError(f"need samples >= 2 and periods > 0, got {samples}, {periods}")
    period = rotation_period(kappa)
    coupling = ChiralCoupling(kappa=kappa)
    h = build_chiral_hamiltonian(coupling, 3)
    start = SpinState(3, np.eye(8, dtype=complex)[1])
    rows = []
    for t in np.linspace(0.0, periods * period, samples):
        simulated = np.abs(evolve_exact(start, h, float(t)).amplitudes[[1, 2, 4]]) ** 2
        analytic = [abs(c) ** 2 for c in analytic_three_spin_amplitudes(float(t), kappa)]
        rows.append([float(t), float(t) / period, *simulated.tolist(), *analytic])
    logger.info(f"chiral demo: {samples} samples over {periods:g}T, kappa={kappa:g}")
    return rows
