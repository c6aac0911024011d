import math

import numpy as np
import pytest
from scipy.special import jv

from app.core.config import config
from app.core.exceptions import (
    ConfigurationError,
    CutoffSaturationError,
    DimensionMismatchError,
    InvalidParameterError,
)
from app.models.models import ChiralCoupling, EtaConfig, FloquetVerifyConfig, ModulationParams
from app.services.bessel import j0_first_root
from app.services.chiral import build_chiral_hamiltonian, rotation_period
from app.services.floquet import (
    CavitySpinState,
    annihilation,
    build_harmonic,
    cavity_residual,
    compare_effective_vs_full,
    effective_hamiltonian,
    effective_kappa,
    effective_spin_hamiltonian,
    eta,
    h0_residual,
    interaction_hamiltonian,
    period_propagator,
    reconstruct_interaction,
    run_ratio_ladder,
    sigma_minus,
    simulate_modulated,
    sweep_to_csv,
    sweep_to_json,
    vacuum_block,
)
from app.services.spin_state import SpinConfig, product_state

F_ROOT = 2.404825557695773


@pytest.fixture
def protocol_params():
    return ModulationParams.protocol(g=1.0, nu_d=20.0, f=j0_first_root())


def test_eta_at_first_root():
    assert eta(j0_first_root(), 2 * math.pi / 3) == pytest.approx(0.307, abs=0.002)


def test_eta_matches_scipy_series():
    f, delta = 1.9, 0.8
    n = np.arange(1, 26)
    expected = 2 * np.sum(jv(n, f) ** 2 * np.sin(n * delta) / n)
    assert eta(f, delta) == pytest.approx(expected, abs=1e-12)


def test_eta_is_odd_in_phase_difference(rng):
    for f, delta in rng.uniform(0.1, 4.0, size=(5, 2)):
        assert eta(f, 0.0) == 0.0
        assert eta(f, -delta) == pytest.approx(-eta(f, delta), abs=1e-15)


def test_effective_kappa():
    f = j0_first_root()
    assert effective_kappa(1.0, 20.0, f) == pytest.approx(0.307 / 20, rel=0.01)
    assert effective_kappa(0.0, 20.0, f) == 0.0
    assert effective_kappa(2.0, 20.0, f) == pytest.approx(4 * effective_kappa(1.0, 20.0, f))
    with pytest.raises(InvalidParameterError):
        effective_kappa(1.0, 0.0, f)


def test_modulation_params_validation():
    with pytest.raises(ValueError):
        ModulationParams(g=1.0, f=F_ROOT, nu_d=0.0, phases=(0.0, 1.0))
    with pytest.raises(ValueError):
        ModulationParams(g=1.0, f=F_ROOT, nu_d=10.0, phases=(0.0,))
    with pytest.raises(ValueError):
        ModulationParams(g=1.0, f=F_ROOT, nu_d=10.0, phases=(0.0, 1.0), photon_cutoff=1)
    assert ModulationParams.protocol(g=1.0, nu_d=10.0, f=F_ROOT).n_spins == 3


def test_model_defaults_follow_configuration():
    assert ModulationParams.protocol(g=1.0, nu_d=10.0, f=F_ROOT).photon_cutoff == config.PHOTON_CUTOFF
    assert ModulationParams(g=1.0, f=F_ROOT, nu_d=10.0, phases=(0.0, 1.0)).photon_cutoff == config.PHOTON_CUTOFF
    assert EtaConfig().n_max == config.N_MAX
    run = FloquetVerifyConfig(ratios=[10.0])
    assert run.photon_cutoff == config.PHOTON_CUTOFF
    assert run.steps_per_period == config.STEPS_PER_PERIOD


def test_operators():
    a = annihilation(3)
    np.testing.assert_allclose(np.diag(a.conj().T @ a), [0, 1, 2, 3])
    with pytest.raises(ConfigurationError):
        annihilation(0)
    # lowering spin 2 of |uud> gives |udd>
    assert sigma_minus(2, 3)[1, 3] == 1.0


def test_h0_vanishes_only_at_the_root(protocol_params):
    assert np.max(np.abs(build_harmonic(0, protocol_params).matrix)) < 1e-10
    rounded = ModulationParams.protocol(g=1.0, nu_d=20.0, f=2.4)
    assert h0_residual(rounded) > 1e-4


def test_harmonics_reconstruct_interaction(protocol_params, rng):
    for t in rng.uniform(0.0, 4 * math.pi / protocol_params.nu_d, size=50):
        direct = interaction_hamiltonian(protocol_params, t)
        rebuilt = reconstruct_interaction(protocol_params, t, n_max=25)
        np.testing.assert_allclose(rebuilt, rebuilt.conj().T, atol=1e-10)
        np.testing.assert_allclose(rebuilt, direct, atol=1e-8)


def test_negative_harmonic_is_adjoint(protocol_params):
    for n in (1, 2, 5):
        np.testing.assert_allclose(
            build_harmonic(-n, protocol_params).matrix,
            build_harmonic(n, protocol_params).matrix.conj().T,
            atol=1e-15,
        )


def test_effective_hamiltonian_is_hermitian(protocol_params):
    assert effective_hamiltonian(protocol_params).is_hermitian(atol=1e-12)


def test_three_spin_vacuum_block_is_the_chiral_hamiltonian(protocol_params):
    kappa = effective_kappa(protocol_params.g, protocol_params.nu_d, protocol_params.f)
    expected = build_chiral_hamiltonian(ChiralCoupling(kappa=kappa), 3).entries
    np.testing.assert_allclose(vacuum_block(effective_hamiltonian(protocol_params)), expected, atol=1e-12)
    np.testing.assert_allclose(effective_spin_hamiltonian(protocol_params).entries, expected, atol=1e-12)


def test_two_spin_vacuum_block():
    f = j0_first_root()
    phases = (0.3, 1.7)
    params = ModulationParams(g=1.0, f=f, nu_d=15.0, phases=phases)
    s1, s2 = sigma_minus(1, 2), sigma_minus(2, 2)
    coefficient = params.g ** 2 / params.nu_d * eta(f, phases[1] - phases[0])
    expected = 1j * coefficient * (s2.T @ s1 - s1.T @ s2)
    block = vacuum_block(effective_hamiltonian(params))
    np.testing.assert_allclose(block, expected, atol=0.05 * abs(coefficient))


def test_cavity_terms_cancel(protocol_params):
    assert cavity_residual(protocol_params) < 1e-12


def test_trivial_runs_return_the_initial_state(protocol_params):
    start = CavitySpinState.from_spin_state(product_state(SpinConfig.parse("udd")), protocol_params.photon_cutoff)
    assert simulate_modulated(protocol_params, start, 0.0) is start
    idle = ModulationParams.protocol(g=0.0, nu_d=20.0, f=F_ROOT)
    assert simulate_modulated(idle, start, 5.0) is start


def test_simulation_conserves_excitations_and_norm(protocol_params):
    start = CavitySpinState.from_spin_state(product_state(SpinConfig.parse("udd")), protocol_params.photon_cutoff)
    final = simulate_modulated(protocol_params, start, 7.3)
    assert np.linalg.norm(final.amplitudes) == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(final.excitation_distribution(), start.excitation_distribution(), atol=1e-9)


def test_period_propagator_is_unitary(protocol_params):
    u = period_propagator(protocol_params, steps_per_period=50)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=1e-12)


def test_simulation_rejects_bad_input(protocol_params):
    two_spins = CavitySpinState.from_spin_state(product_state(SpinConfig.parse("ud")), protocol_params.photon_cutoff)
    with pytest.raises(DimensionMismatchError):
        simulate_modulated(protocol_params, two_spins, 1.0)
    start = CavitySpinState.from_spin_state(product_state(SpinConfig.parse("udd")), protocol_params.photon_cutoff)
    with pytest.raises(InvalidParameterError):
        simulate_modulated(protocol_params, start, -1.0)


def test_saturated_cutoff_is_reported():
    # strong coupling at low frequency pumps photons into the top Fock level
    params = ModulationParams.protocol(g=1.0, nu_d=0.5, f=F_ROOT, photon_cutoff=2)
    start = CavitySpinState.from_spin_state(product_state(SpinConfig.parse("uuu")), 2)
    with pytest.raises(CutoffSaturationError):
        simulate_modulated(params, start, 3.0, steps_per_period=100)


def test_zero_coupling_keeps_perfect_fidelity():
    params = ModulationParams.protocol(g=0.0, nu_d=10.0, f=F_ROOT)
    points = compare_effective_vs_full(params, [0.0, 1.0, 5.0])
    assert [p.fidelity_to_effective for p in points] == pytest.approx([1.0, 1.0, 1.0])
    assert all(p.nu_d_over_g is None for p in points)


@pytest.mark.slow
def test_step_halving_changes_fidelity_below_tolerance():
    ratios = [10.0, 30.0, 100.0]
    coarse = run_ratio_ladder(ratios, g=1.0, fractions=[1.0], steps_per_period=config.STEPS_PER_PERIOD, workers=3)
    fine = run_ratio_ladder(ratios, g=1.0, fractions=[1.0], steps_per_period=2 * config.STEPS_PER_PERIOD, workers=3)
    for a, b in zip(coarse, fine):
        assert a.time == pytest.approx(b.time)
        assert abs(a.fidelity_to_effective - b.fidelity_to_effective) < 1e-6


@pytest.mark.slow
def test_ratio_ladder_converges():
    points = run_ratio_ladder([10.0, 30.0, 100.0], g=1.0, fractions=[1.0], workers=3)
    assert [p.nu_d_over_g for p in points] == [10.0, 30.0, 100.0]
    infidelities = [1 - p.fidelity_to_effective for p in points]
    assert infidelities[0] > infidelities[1] > infidelities[2]
    assert points[-1].fidelity_to_effective >= 0.99
    kappa = effective_kappa(1.0, 100.0, j0_first_root())
    assert points[-1].time == pytest.approx(rotation_period(kappa))


def test_sweep_exports(tmp_path):
    params = ModulationParams.protocol(g=1.0, nu_d=40.0, f=F_ROOT)
    points = compare_effective_vs_full(params, [0.0, 2.0])
    csv_path, json_path = tmp_path / "sweep.csv", tmp_path / "sweep.json"
    sweep_to_csv(points, csv_path, metadata={"g": 1.0})
    sweep_to_json(points, json_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "# g=1"
    assert lines[1] == "nu_d_over_g,f,time,vacuum_weight,fidelity_to_effective"
    assert lines[2] == "40,2.4048255577,0,1,1"
    assert '"fidelity_to_effective"' in json_path.read_text()
