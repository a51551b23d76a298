import math

import numpy as np
import pytest

from packages.ptebd.bath import (
    EtaTable,
    SpectralDensity,
    bath_correlation,
    bose_occupation,
    correlation_spectrum,
    eta_coefficients,
    lineshape,
    spectral_value,
)
from packages.ptebd.errors import ArgumentError, NumericError

OHMIC = SpectralDensity("exponential", alpha=0.1, zeta=1.0, omega_c=4.0)


def test_spectral_values():
    assert spectral_value(OHMIC, 0.0) == 0.0
    assert spectral_value(OHMIC, 4.0) == pytest.approx(0.8 * math.exp(-1.0), rel=1e-12)
    sub = SpectralDensity("exponential", alpha=0.1, zeta=0.6, omega_c=4.0)
    assert spectral_value(sub, 0.01) / spectral_value(OHMIC, 0.01) > 1.0
    with pytest.raises(ArgumentError):
        spectral_value(OHMIC, -1.0)


@pytest.mark.parametrize("kwargs", [
    {"family": "lorentzian"},
    {"alpha": -0.1},
    {"omega_c": 0.0},
    {"zeta": 0.0},
])
def test_spectral_density_rejects_bad_parameters(kwargs):
    with pytest.raises(ArgumentError):
        SpectralDensity(**kwargs)


def test_bose_occupation_limits():
    assert np.all(bose_occupation(np.array([1.0, 2.0]), 0.0) == 0.0)
    assert bose_occupation(1.0, 0.5) == pytest.approx(1.0 / math.expm1(2.0))
    with pytest.raises(ArgumentError):
        bose_occupation(1.0, -0.1)


def test_correlation_at_zero_is_real_and_positive():
    c0 = bath_correlation(OHMIC, 0.2, 0.0)
    assert c0.real > 0
    assert c0.imag == pytest.approx(0.0, abs=1e-14)


def test_correlation_is_second_derivative_of_lineshape():
    t, h = 0.5, 5e-3
    g = lineshape(OHMIC, 0.2, [t - h, t, t + h])
    numeric = (g[0] - 2.0 * g[1] + g[2]) / h ** 2
    c = bath_correlation(OHMIC, 0.2, t)
    assert abs(numeric - c) < 1e-2 * abs(c) + 1e-4


def test_correlation_conjugate_symmetry():
    times = np.array([0.3, 1.1])
    np.testing.assert_allclose(bath_correlation(OHMIC, 0.2, -times), np.conj(bath_correlation(OHMIC, 0.2, times)),
                               atol=1e-10)


def test_detailed_balance_of_correlation_spectrum():
    T, nu = 0.2, 1.0
    up = correlation_spectrum(OHMIC, T, nu, lamb_shift=False)
    down = correlation_spectrum(OHMIC, T, -nu, lamb_shift=False)
    assert down.real / up.real == pytest.approx(math.exp(nu / T), rel=1e-10)
    assert correlation_spectrum(SpectralDensity(alpha=0.0), T, nu) == 0j


def test_eta_vanishes_without_coupling():
    table = eta_coefficients(SpectralDensity(alpha=0.0), 0.2, 0.2, 10, 5)
    for kind in ("interior", "start", "end", "end_to_start"):
        assert np.all(getattr(table, kind) == 0)


def test_eta_is_linear_in_alpha():
    a = eta_coefficients(OHMIC, 0.2, 0.2, 10, 5)
    b = eta_coefficients(SpectralDensity(alpha=0.2, omega_c=4.0), 0.2, 0.2, 10, 5)
    np.testing.assert_allclose(b.interior, 2.0 * a.interior, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(b.end_to_start, 2.0 * a.end_to_start, rtol=1e-12, atol=1e-15)


def test_eta_self_term_is_lineshape_at_one_step():
    table = eta_coefficients(OHMIC, 0.2, 0.2, 10, 3)
    g = lineshape(OHMIC, 0.2, [0.2])[0]
    assert table.coefficient(0) == pytest.approx(g, rel=1e-7)
    assert table.coefficient(4) == 0j
    with pytest.raises(ArgumentError):
        table.coefficient(-1)


def test_eta_rejects_bad_memory():
    with pytest.raises(ArgumentError):
        eta_coefficients(OHMIC, 0.2, 0.2, 5, 6)
    with pytest.raises(ArgumentError):
        eta_coefficients(OHMIC, 0.2, 0.0, 5, 2)


def test_with_memory_reuses_prefix():
    table = eta_coefficients(OHMIC, 0.2, 0.2, 10, 6)
    short = table.with_memory(2)
    assert short.memory_cutoff == 2
    np.testing.assert_array_equal(short.interior, table.interior[:3])
    assert short.coefficient(3) == 0j
    with pytest.raises(ArgumentError):
        table.with_memory(7)


def test_json_round_trip_keeps_checksum():
    table = eta_coefficients(OHMIC, 0.2, 0.2, 10, 4)
    back = EtaTable.from_json(table.to_json())
    assert back.checksum == table.checksum
    np.testing.assert_array_equal(back.interior, table.interior)


def test_tampered_document_is_rejected():
    doc = eta_coefficients(OHMIC, 0.2, 0.2, 10, 4).to_dict()
    doc["checksum"] = "0" * 64
    with pytest.raises(NumericError):
        EtaTable.from_dict(doc)
