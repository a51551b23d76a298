import math

import numpy as np
import pytest

from packages.ptebd.bath import SpectralDensity
from packages.ptebd.errors import ArgumentError
from packages.ptebd.liouville import partial_trace, pure_state
from packages.ptebd.measures import concurrence, imbalance
from packages.ptebd.models import (
    INV_GOLDEN,
    SIGMA_Z,
    AAChainModel,
    DrivenQubitModel,
    SpinBosonModel,
    TwoQubitModel,
    UncoupledQubits,
    aa_potential,
    basis_state,
    bell_state,
    buffer_bell_state,
    ground_state,
    hamiltonian,
    neel_bell_state,
    resonance_report,
    single_particle_ipr,
)


def test_two_qubit_spectrum():
    model = TwoQubitModel(1.0, 1.0, 0.375)
    h = model.hamiltonian()
    np.testing.assert_allclose(h, h.conj().T)
    expected = sorted([-math.hypot(1.0, 0.375), -0.375, 0.375, math.hypot(1.0, 0.375)])
    np.testing.assert_allclose(np.linalg.eigvalsh(h), expected, atol=1e-12)
    rho = ground_state(model)
    assert np.real(np.trace(rho @ h)) == pytest.approx(expected[0])


def test_two_qubit_model_has_one_bond():
    with pytest.raises(ArgumentError):
        TwoQubitModel().bond_hamiltonian(2)
    with pytest.raises(ArgumentError):
        TwoQubitModel().coupling_operator(3)


def test_aa_potential():
    assert aa_potential(0.0, INV_GOLDEN, 3) == 0.0
    assert aa_potential(4.0, INV_GOLDEN, 1) == pytest.approx(-2.9495, abs=1e-4)
    assert [aa_potential(1.0, 0.5, i) for i in (1, 2)] == pytest.approx([-1.0, 1.0])
    with pytest.raises(ArgumentError):
        aa_potential(1.0, INV_GOLDEN, 0)


def test_chain_origin_shifts_potential():
    whole = AAChainModel(n_sites=8, h=4.0)
    cut = AAChainModel(n_sites=2, h=4.0, origin=4)
    assert cut.site_field(1) == pytest.approx(whole.site_field(4))
    assert cut.site_field(2) == pytest.approx(whole.site_field(5))


def test_free_xx_chain_single_excitation_band():
    n = 6
    chain = AAChainModel(n_sites=n, J=1.0, Delta=0.0, h=0.0)
    h = chain.hamiltonian()
    np.testing.assert_allclose(h, h.conj().T)
    one = [1 << (n - i) for i in range(1, n + 1)]
    block = h[np.ix_(one, one)]
    expected = sorted(math.cos(math.pi * k / (n + 1)) for k in range(1, n + 1))
    np.testing.assert_allclose(np.linalg.eigvalsh(block), expected, atol=1e-12)


def test_chain_conserves_magnetization():
    chain = AAChainModel(n_sites=4, h=2.0)
    h, m = chain.hamiltonian(), chain.magnetization()
    np.testing.assert_allclose(h @ m - m @ h, 0.0, atol=1e-12)


def test_chain_rejects_bad_sites():
    with pytest.raises(ArgumentError):
        AAChainModel(n_sites=4, coupled_sites=(5,))
    with pytest.raises(ArgumentError):
        AAChainModel(n_sites=4).bond_hamiltonian(4)


def test_driven_qubit_starts_undriven():
    model = DrivenQubitModel(omega=1.0, Lambda=50.0, Omega=10.0)
    np.testing.assert_allclose(model.site_hamiltonian(1, 0.0), 0.5 * SIGMA_Z)
    assert model.time_dependent
    assert model.max_drive_frequency == 10.0
    assert DrivenQubitModel(Lambda=0.0).max_drive_frequency == 0.0
    with pytest.raises(ArgumentError):
        hamiltonian(model, -1.0)


def test_uncoupled_qubits_are_a_sum_of_parts():
    pair = UncoupledQubits((DrivenQubitModel(Omega=0.0), DrivenQubitModel(omega=2.0, Omega=0.0)))
    h = pair.hamiltonian(0.3)
    expected = np.kron(0.5 * SIGMA_Z, np.eye(2)) + np.kron(np.eye(2), SIGMA_Z)
    np.testing.assert_allclose(h, expected, atol=1e-12)


def test_spin_boson_model():
    model = SpinBosonModel(epsilon=1.0, delta=0.5)
    assert model.n_sites == 1
    np.testing.assert_allclose(model.coupling_operator(), SIGMA_Z)
    with pytest.raises(ArgumentError):
        model.bond_hamiltonian(1)


def test_basis_and_bell_states():
    rho = basis_state("01")
    assert rho[1, 1] == 1.0
    assert concurrence(bell_state()) == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        basis_state("012")


def test_neel_bell_state():
    psi = neel_bell_state(8)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert np.flatnonzero(psi).tolist() == [int("01010100", 2), int("11010101", 2)]
    ends = partial_trace(pure_state(psi), [1, 8], 8)
    assert concurrence(ends) == pytest.approx(1.0)
    assert imbalance(psi, 8) == pytest.approx(-0.75)
    with pytest.raises(ArgumentError):
        neel_bell_state(5)


def test_buffer_bell_state():
    psi = buffer_bell_state(8, (4, 5))
    assert concurrence(partial_trace(pure_state(psi), [4, 5], 8)) == pytest.approx(1.0)
    assert concurrence(partial_trace(pure_state(psi), [1, 8], 8)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ArgumentError):
        buffer_bell_state(8, (4, 6))


def test_resonance_report_limits():
    chain = AAChainModel(n_sites=4, h=0.6, coupled_sites=(1,))
    cold = resonance_report(chain, SpectralDensity(alpha=0.1), 0.0)
    assert cold.total_flux == 0.0
    assert all(tr.weight == 0.0 for tr in cold.transitions)
    off = resonance_report(chain, SpectralDensity(alpha=0.0), 1.0)
    assert off.count == 0
    warm = resonance_report(chain, SpectralDensity(alpha=0.1), 1.0)
    assert warm.count > 0 and warm.total_flux > 0
    omegas = [tr.omega for tr in warm.transitions]
    assert omegas == sorted(omegas) and omegas[0] > 0


def test_localized_modes_have_larger_ipr():
    extended = single_particle_ipr(AAChainModel(n_sites=8, h=0.6))
    localized = single_particle_ipr(AAChainModel(n_sites=8, h=4.0, Delta=0.0))
    assert np.all(extended > 0) and np.all(extended <= 1 + 1e-12)
    assert localized.mean() > extended.mean()
