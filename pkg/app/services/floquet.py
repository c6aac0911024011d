"""Floquet synthesis of the chiral coupling from modulated spin-cavity interactions.

Spins 1..N (N = 2 or 3) couple to one cavity mode with
    H_I(t) = g a^dag sum_j s-_j exp(i f cos(nu_d t + phi_j)) + h.c.
The Jacobi-Anger expansion gives H_I = sum_n h_n exp(i n nu_d t) with
    h_n = i^n g [J_n(f) a^dag sum_j s-_j e^{i n phi_j} + J_n(-f) sum_j s+_j e^{i n phi_j} a]
and the effective Hamiltonian h_0 + sum_{n>=1} [h_n, h_-n] / (n nu_d).

The joint space is spins (x) cavity with index spin_index * (cutoff + 1) + photons.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import config
from app.core.exceptions import (
    ConfigurationError,
    CutoffSaturationError,
    DimensionMismatchError,
    InvalidParameterError,
    SimulationError,
)
from app.core.utils import write_csv, write_json
from app.models.models import ModulationParams, SweepPoint
from app.services.bessel import bessel_j, bessel_j_orders, j0_first_root
from app.services.chiral import HamiltonianMatrix, evolve_exact, hermitian_propagator, rotation_period
from app.services.spin_state import SpinConfig, SpinState, fidelity, product_state

logger = logging.getLogger(__name__)

PROTOCOL_PHASE_STEP = 2 * math.pi / 3
NORM_DRIFT_LIMIT = 1e-9
SWEEP_COLUMNS = ("nu_d_over_g", "f", "time", "vacuum_weight", "fidelity_to_effective")
_I_POWERS = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class CavitySpinState:
    n_spins: int
    photon_cutoff: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        expected = 2 ** self.n_spins * (self.photon_cutoff + 1)
        if amplitudes.shape != (expected,):
            raise DimensionMismatchError(f"expected {expected} amplitudes, got shape {amplitudes.shape}")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_DRIFT_LIMIT:
            raise SimulationError(f"spin-cavity state norm drifted to {norm:.15g}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_spin_state(cls, spins: SpinState, photon_cutoff: int, photons: int = 0) -> "CavitySpinState":
        if not 0 <= photons <= photon_cutoff:
            raise InvalidParameterError(f"{photons} photons outside cutoff {photon_cutoff}")
        fock = np.zeros(photon_cutoff + 1, dtype=complex)
        fock[photons] = 1.0
        return cls(spins.n_spins, photon_cutoff, np.kron(spins.amplitudes, fock))

    def _grid(self) -> np.ndarray:
        return self.amplitudes.reshape(2 ** self.n_spins, self.photon_cutoff + 1)

    def photon_populations(self) -> np.ndarray:
        return np.sum(np.abs(self._grid()) ** 2, axis=0)

    def vacuum_projection(self) -> Tuple[float, Optional[SpinState]]:
        """Weight of the zero-photon sector and the renormalised spin state in it."""
        vacuum = self._grid()[:, 0]
        weight = float(np.sum(np.abs(vacuum) ** 2))
        if weight < 1e-15:
            return weight, None
        return weight, SpinState.from_amplitudes(self.n_spins, vacuum)

    def excitation_distribution(self) -> np.ndarray:
        """Probability of each total excitation number (up spins + photons)."""
        counts = _excitation_numbers(self.n_spins, self.photon_cutoff)
        return np.bincount(counts, weights=np.abs(self.amplitudes) ** 2, minlength=self.n_spins + self.photon_cutoff + 1)


@dataclass(frozen=True)
class HarmonicOperator:
    order: int
    matrix: np.ndarray = field(repr=False)


# Operators

def sigma_minus(spin: int, n_spins: int) -> np.ndarray:
    """Lowering operator on `spin` (1-based) in the 2^n_spins spin space."""
    dim = 2 ** n_spins
    bit = 1 << (spin - 1)
    op = np.zeros((dim, dim), dtype=complex)
    up = np.arange(dim)[(np.arange(dim) & bit) != 0]
    op[up ^ bit, up] = 1.0
    return op


def annihilation(photon_cutoff: int) -> np.ndarray:
    if photon_cutoff < 1:
        raise ConfigurationError(f"a photon cutoff of {photon_cutoff} cannot represent a^dag")
    return np.diag(np.sqrt(np.arange(1, photon_cutoff + 1)), k=1).astype(complex)


def _excitation_numbers(n_spins: int, photon_cutoff: int) -> np.ndarray:
    ups = np.array([bin(i).count("1") for i in range(2 ** n_spins)])
    return (ups[:, None] + np.arange(photon_cutoff + 1)[None, :]).reshape(-1)


def _lowering_terms(params: ModulationParams) -> List[np.ndarray]:
    return [sigma_minus(j, params.n_spins) for j in range(1, params.n_spins + 1)]


def interaction_hamiltonian(params: ModulationParams, t: float) -> np.ndarray:
    """H_I(t) built directly from its defining expression."""
    a = annihilation(params.photon_cutoff)
    lowering = sum(
        s_minus * np.exp(1j * params.f * math.cos(params.nu_d * t + phi))
        for s_minus, phi in zip(_lowering_terms(params), params.phases)
    )
    emit = params.g * np.kron(lowering, a.conj().T)
    return emit + emit.conj().T


def build_harmonic(n: int, params: ModulationParams) -> HarmonicOperator:
    """Coefficient h_n of exp(i n nu_d t) in H_I(t)."""
    a = annihilation(params.photon_cutoff)
    lowering = _lowering_terms(params)
    spin_down = sum(s * np.exp(1j * n * phi) for s, phi in zip(lowering, params.phases))
    spin_up = sum(s.T * np.exp(1j * n * phi) for s, phi in zip(lowering, params.phases))
    prefactor = _I_POWERS[n % 4] * params.g
    matrix = prefactor * (
        bessel_j(n, params.f) * np.kron(spin_down, a.conj().T)
        + bessel_j(n, -params.f) * np.kron(spin_up, a)
    )
    return HarmonicOperator(order=n, matrix=matrix)


def reconstruct_interaction(params: ModulationParams, t: float, n_max: int = config.N_MAX) -> np.ndarray:
    """sum_{|n| <= n_max} h_n exp(i n nu_d t)."""
    return sum(
        build_harmonic(n, params).matrix * np.exp(1j * n * params.nu_d * t)
        for n in range(-n_max, n_max + 1)
    )


def h0_residual(params: ModulationParams) -> float:
    """Largest entry of h_0; vanishes only when f is a root of J_0."""
    return float(np.max(np.abs(build_harmonic(0, params).matrix)))


# Effective Hamiltonian

def eta(f: float, delta_phi: float, n_max: int = config.N_MAX) -> float:
    """2 sum_{n=1}^{n_max} J_n(f)^2 sin(n delta_phi) / n."""
    j = bessel_j_orders(n_max, f)
    if abs(j[n_max]) >= 1e-12:
        logger.warning(f"eta series truncated at n_max={n_max} while |J_n_max({f})|={abs(j[n_max]):.2e}")
    n = np.arange(1, n_max + 1)
    return float(2 * np.sum(j[1:] ** 2 * np.sin(n * delta_phi) / n))


def effective_kappa(g: float, nu_d: float, f: float, n_max: int = config.N_MAX) -> float:
    """kappa = g^2 eta(f, 2 pi / 3) / nu_d for the protocol phase spacing."""
    if not nu_d > 0:
        raise InvalidParameterError(f"nu_d must be positive, got {nu_d}")
    return g * g * eta(f, PROTOCOL_PHASE_STEP, n_max) / nu_d


def effective_hamiltonian(params: ModulationParams, n_max: int = config.N_MAX) -> HamiltonianMatrix:
    """h_0 + sum_{n=1}^{n_max} [h_n, h_-n] / (n nu_d) on the spin-cavity space."""
    entries = build_harmonic(0, params).matrix.copy()
    for n in range(1, n_max + 1):
        h_plus = build_harmonic(n, params).matrix
        h_minus = build_harmonic(-n, params).matrix
        entries += (h_plus @ h_minus - h_minus @ h_plus) / (n * params.nu_d)
    return HamiltonianMatrix(entries, params.n_spins, params.photon_cutoff)


def effective_spin_hamiltonian(params: ModulationParams, n_max: int = config.N_MAX) -> HamiltonianMatrix:
    """Cavity-free model: coefficient of s+_j s-_k is i (g^2 / nu_d) eta(f, phi_j - phi_k).

    For three spins with phi_j = 2 j pi / 3 this is the cyclic chiral
    Hamiltonian with kappa = effective_kappa.
    """
    lowering = _lowering_terms(params)
    scale = params.g ** 2 / params.nu_d
    dim = 2 ** params.n_spins
    entries = np.zeros((dim, dim), dtype=complex)
    for j, phi_j in enumerate(params.phases):
        for k, phi_k in enumerate(params.phases):
            if j != k:
                entries += 1j * scale * eta(params.f, phi_j - phi_k, n_max) * (lowering[j].T @ lowering[k])
    return HamiltonianMatrix(entries, params.n_spins)


def vacuum_block(h: HamiltonianMatrix) -> np.ndarray:
    """Restriction of a spin-cavity matrix to the zero-photon sector."""
    if h.photon_cutoff is None:
        raise InvalidParameterError("vacuum_block needs a spin-cavity Hamiltonian")
    idx = np.arange(2 ** h.n_spins) * (h.photon_cutoff + 1)
    return h.entries[np.ix_(idx, idx)]


def cavity_residual(params: ModulationParams, n_max: int = config.N_MAX) -> float:
    """Largest deviation of H_e - h_0 from (cavity-free model) x 1 below the top Fock level.

    The photon-number dependent parts of [h_n, h_-n] cancel, so this is
    rounding noise; the truncated top level is excluded because a a^dag is
    wrong there.
    """
    h_e = effective_hamiltonian(params, n_max).entries - build_harmonic(0, params).matrix
    spin_model = effective_spin_hamiltonian(params, n_max).entries
    expected = np.kron(spin_model, np.eye(params.photon_cutoff + 1))
    photons = np.tile(np.arange(params.photon_cutoff + 1), 2 ** params.n_spins)
    keep = photons < params.photon_cutoff
    residual = float(np.max(np.abs((h_e - expected)[np.ix_(keep, keep)])))
    logger.info(f"cavity residual of the effective Hamiltonian: {residual:.3e}")
    return residual


# Time-dependent integration

class StroboscopicIntegrator:
    """Piecewise-constant midpoint exponentials of H_I(t) over a drive period.

    H_I is periodic in tau = 2 pi / nu_d, so whole periods reuse the one-period
    propagator and only the final partial period is stepped explicitly.
    """

    def __init__(self, params: ModulationParams, steps_per_period: int = config.STEPS_PER_PERIOD):
        if steps_per_period < 1:
            raise InvalidParameterError(f"steps_per_period must be positive, got {steps_per_period}")
        self.params = params
        self.steps_per_period = steps_per_period
        self.drive_period = 2 * math.pi / params.nu_d
        self.dt = self.drive_period / steps_per_period
        self._period_propagator = self.partial_propagator(self.drive_period)

    def _step(self, t_mid: float, duration: float) -> np.ndarray:
        return hermitian_propagator(interaction_hamiltonian(self.params, t_mid), duration)

    def partial_propagator(self, duration: float) -> np.ndarray:
        """Propagator from t = 0 to `duration` (at most one drive period)."""
        dim = 2 ** self.params.n_spins * (self.params.photon_cutoff + 1)
        propagator = np.eye(dim, dtype=complex)
        full_steps = min(int(duration // self.dt), self.steps_per_period)
        for k in range(full_steps):
            propagator = self._step((k + 0.5) * self.dt, self.dt) @ propagator
        leftover = duration - full_steps * self.dt
        if leftover > 1e-15 * self.drive_period:
            start = full_steps * self.dt
            propagator = self._step(start + 0.5 * leftover, leftover) @ propagator
        return propagator

    def period_propagator(self) -> np.ndarray:
        return self._period_propagator

    def evolve(self, amplitudes: np.ndarray, t_final: float) -> np.ndarray:
        periods, remainder = divmod(t_final, self.drive_period)
        psi = np.asarray(amplitudes, dtype=complex)
        if periods:
            psi = np.linalg.matrix_power(self._period_propagator, int(periods)) @ psi
        if remainder > 0:
            psi = self.partial_propagator(remainder) @ psi
        return psi


def period_propagator(params: ModulationParams, steps_per_period: int = config.STEPS_PER_PERIOD) -> np.ndarray:
    return StroboscopicIntegrator(params, steps_per_period).period_propagator()


def _check_saturation(state: CavitySpinState) -> None:
    top = float(state.photon_populations()[-1])
    if top >= config.SATURATION_LIMIT:
        raise CutoffSaturationError(top, config.SATURATION_LIMIT)


def _finish(initial: CavitySpinState, psi: np.ndarray) -> CavitySpinState:
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > NORM_DRIFT_LIMIT:
        raise SimulationError(f"integrator norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:.0e}")
    return CavitySpinState(initial.n_spins, initial.photon_cutoff, psi)


def _check_initial(params: ModulationParams, initial: CavitySpinState) -> None:
    if initial.n_spins != params.n_spins or initial.photon_cutoff != params.photon_cutoff:
        raise DimensionMismatchError(
            f"state has {initial.n_spins} spins / cutoff {initial.photon_cutoff}, "
            f"parameters need {params.n_spins} / {params.photon_cutoff}"
        )


def simulate_modulated(
    params: ModulationParams,
    initial: CavitySpinState,
    t_final: float,
    steps_per_period: int = config.STEPS_PER_PERIOD,
) -> CavitySpinState:
    """Integrate the Schroedinger equation under the full H_I(t) from t = 0."""
    _check_initial(params, initial)
    if t_final < 0:
        raise InvalidParameterError(f"t_final must be non-negative, got {t_final}")
    if t_final == 0 or params.g == 0:
        return initial
    integrator = StroboscopicIntegrator(params, steps_per_period)
    final = _finish(initial, integrator.evolve(initial.amplitudes, t_final))
    _check_saturation(final)
    return final


def compare_effective_vs_full(
    params: ModulationParams,
    sample_times: Sequence[float],
    initial: Optional[SpinState] = None,
    n_max: int = config.N_MAX,
    steps_per_period: int = config.STEPS_PER_PERIOD,
) -> List[SweepPoint]:
    """Fidelity between the vacuum-projected full dynamics and the effective spin model.

    The spins start in `initial` (spin 1 up by default) and the cavity in vacuum.
    """
    if initial is None:
        initial = product_state(SpinConfig((True,) + (False,) * (params.n_spins - 1)))
    if initial.n_spins != params.n_spins:
        raise DimensionMismatchError(f"initial state has {initial.n_spins} spins, parameters {params.n_spins}")
    start = CavitySpinState.from_spin_state(initial, params.photon_cutoff)
    h_eff = effective_spin_hamiltonian(params, n_max)
    integrator = StroboscopicIntegrator(params, steps_per_period) if params.g > 0 else None
    ratio = params.nu_d / params.g if params.g > 0 else None

    points = []
    for t in sample_times:
        if integrator is None or t == 0:
            full = start
        else:
            full = _finish(start, integrator.evolve(start.amplitudes, t))
            _check_saturation(full)
        weight, projected = full.vacuum_projection()
        effective = evolve_exact(initial, h_eff, t)
        score = 0.0 if projected is None else fidelity(projected, effective)
        points.append(
            SweepPoint(nu_d_over_g=ratio, f=params.f, time=t, vacuum_weight=weight, fidelity_to_effective=score)
        )
    return points


def run_ratio_ladder(
    ratios: Sequence[float],
    g: float = 1.0,
    f: Optional[float] = None,
    photon_cutoff: int = config.PHOTON_CUTOFF,
    steps_per_period: int = config.STEPS_PER_PERIOD,
    fractions: Optional[Sequence[float]] = None,
    workers: int = 1,
    n_max: int = config.N_MAX,
) -> List[SweepPoint]:
    """Effective-vs-full comparison for three protocol spins at each nu_d / g.

    Sample times are `fractions` of the rotation period T of each point
    (default 0, 0.1, ..., 1). Points are independent and keep input order.
    """
    if g <= 0:
        raise InvalidParameterError(f"the ratio ladder needs g > 0, got {g}")
    f = j0_first_root() if f is None else f
    fractions = np.linspace(0.0, 1.0, 11) if fractions is None else np.asarray(fractions, dtype=float)

    def run_point(ratio: float) -> List[SweepPoint]:
        params = ModulationParams.protocol(g=g, nu_d=ratio * g, f=f, photon_cutoff=photon_cutoff)
        period = rotation_period(effective_kappa(g, params.nu_d, f, n_max))
        points = compare_effective_vs_full(
            params, [float(x) * period for x in fractions], n_max=n_max, steps_per_period=steps_per_period
        )
        logger.info(f"nu_d/g={ratio:g}: fidelity at the last sample {points[-1].fidelity_to_effective:.10f}")
        return points

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_point, ratios))
    else:
        results = [run_point(ratio) for ratio in ratios]
    return [point for points in results for point in points]


def sweep_to_csv(points: Sequence[SweepPoint], path: Optional[Path], metadata: Optional[dict] = None) -> None:
    rows = ([getattr(point, column) for column in SWEEP_COLUMNS] for point in points)
    write_csv(path, SWEEP_COLUMNS, rows, metadata=metadata)


def sweep_to_json(points: Sequence[SweepPoint], path: Optional[Path], metadata: Optional[dict] = None) -> None:
    write_json(path, {"metadata": metadata or {}, "points": [point.model_dump(mode="json") for point in points]})
