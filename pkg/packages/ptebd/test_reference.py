import math

import numpy as np
import pytest

from packages.ptebd.bath import SpectralDensity, eta_coefficients
from packages.ptebd.errors import ArgumentError, CapacityError, NumericError, ShapeError
from packages.ptebd.liouville import pure_state
from packages.ptebd.models import SIGMA_X, SIGMA_Z, SpinBosonModel, TwoQubitModel, basis_state
from packages.ptebd.reference import (
    BathCoupling,
    bloch_redfield_evolve,
    exact_evolve,
    path_sum,
    redfield_generator,
    steady_state,
)

OHMIC = SpectralDensity("exponential", alpha=0.1, zeta=1.0, omega_c=4.0)
PLUS = pure_state([1.0, 1.0])


def test_exact_evolution_of_free_precession():
    record = exact_evolve(0.5 * SIGMA_Z, PLUS, [0.0, 0.7, 1.3])
    for t, rho in zip(record.times, record.states[(1,)]):
        assert rho[0, 1] == pytest.approx(0.5 * np.exp(-1j * t))
    constant = exact_evolve(np.zeros((2, 2)), PLUS, [0.0, 5.0])
    np.testing.assert_allclose(constant.states[(1,)][-1], PLUS)


def test_exact_evolution_limits():
    with pytest.raises(CapacityError):
        exact_evolve(np.zeros((1025, 1025)), np.eye(1025) / 1025, [0.0])
    with pytest.raises(ShapeError):
        exact_evolve(np.zeros((4, 4)), PLUS, [0.0])


def test_redfield_without_coupling_is_unitary():
    model = TwoQubitModel()
    rho0 = basis_state("00")
    off = SpectralDensity(alpha=0.0)
    times = [0.1 * k for k in range(11)]
    redfield = bloch_redfield_evolve(model, {1: (off, 0.2), 2: (off, 0.2)}, rho0, times)
    exact = exact_evolve(model.hamiltonian(), rho0, times)
    for a, b in zip(redfield.states[(1, 2)], exact.states[(1, 2)]):
        np.testing.assert_allclose(a, b, atol=1e-10)


def test_redfield_steady_state_is_gibbs():
    omega, T = 1.0, 0.5
    h = 0.5 * omega * SIGMA_Z
    gen = redfield_generator(h, [BathCoupling(SpectralDensity(alpha=0.01), T, SIGMA_X)])
    rho = steady_state(gen)
    assert np.trace(rho).real == pytest.approx(1.0)
    # sigma_z |0> = |0>, so |0> is the excited level
    assert rho[0, 0].real / rho[1, 1].real == pytest.approx(math.exp(-omega / T), rel=1e-6)
    assert abs(rho[0, 1]) < 1e-10


def test_steady_state_rejects_non_finite_generators():
    gen = np.zeros((4, 4), dtype=complex)
    gen[1, 1] = np.nan
    with pytest.raises(NumericError):
        steady_state(gen)


def test_redfield_rejects_time_dependent_models():
    from packages.ptebd.models import DrivenQubitModel

    with pytest.raises(ArgumentError):
        bloch_redfield_evolve(DrivenQubitModel(), {1: (OHMIC, 0.2)}, PLUS, [0.0, 0.1])


def test_redfield_dimension_limit():
    with pytest.raises(CapacityError):
        redfield_generator(np.zeros((128, 128)), [])


@pytest.mark.parametrize("grid", ["window", "endpoint"])
def test_path_sum_preserves_trace(grid):
    model = SpinBosonModel(1.0, 1.0)
    eta = eta_coefficients(OHMIC, 0.2, 0.2, 4, 4)
    rho = path_sum(eta, model.hamiltonian(), SIGMA_Z, basis_state("0"), 4, grid=grid)
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)


def test_path_sum_without_bath_is_unitary():
    model = SpinBosonModel(1.0, 1.0)
    eta = eta_coefficients(SpectralDensity(alpha=0.0), 0.2, 0.2, 3, 3)
    rho = path_sum(eta, model.hamiltonian(), SIGMA_Z, PLUS, 3)
    exact = exact_evolve(model.hamiltonian(), PLUS, [0.6]).states[(1,)][0]
    np.testing.assert_allclose(rho, exact, atol=1e-12)


def test_path_sum_limits():
    model = SpinBosonModel()
    eta = eta_coefficients(SpectralDensity(alpha=0.0), 0.2, 0.2, 11, 1)
    with pytest.raises(CapacityError):
        path_sum(eta, model.hamiltonian(), SIGMA_Z, PLUS, 11)
    with pytest.raises(ArgumentError):
        path_sum(eta, model.hamiltonian(), SIGMA_Z, PLUS, 2, grid="midpoint")
    with pytest.raises(ShapeError):
        path_sum(eta, model.hamiltonian(), np.eye(4), PLUS, 2)
