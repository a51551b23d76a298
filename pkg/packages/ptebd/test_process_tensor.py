import itertools

import numpy as np
import pytest

from packages.ptebd.bath import EtaTable
from packages.ptebd.errors import ArgumentError, ShapeError
from packages.ptebd.process_tensor import (
    ProcessTensorCache,
    build_process_tensor,
    influence_function,
    load,
    rebuild_with_memory,
    restrict,
    save,
)
from packages.ptebd.tensor_core import EXACT

LAMBDAS = [1.0, -1.0]


def _table(entries, memory, n_steps=6):
    entries = np.asarray(entries, dtype=complex)
    return EtaTable(
        delta_t=0.2, n_steps=n_steps, memory_cutoff=memory,
        interior=entries, start=entries.copy(), end=entries.copy(), end_to_start=entries.copy(),
    )


def _random_table(memory, seed=0, n_steps=6):
    rng = np.random.default_rng(seed)
    return _table(0.1 * (rng.standard_normal(memory + 1) + 1j * rng.standard_normal(memory + 1)), memory, n_steps)


def _dense(pt):
    """Diagonal of the full MPO in the computational Liouville basis, one axis per step."""
    env = np.ones(1, dtype=complex)
    for core in pt.cores:
        diag = np.einsum("sslr->slr", core)
        env = np.tensordot(env, diag, axes=(-1, 1))
    return env[..., 0]


def test_influence_example_value():
    f = influence_function(_table([0.1 + 0.05j, 0.0], 1), 0, LAMBDAS)
    # (p, q) = (+1, -1): diff 2, eta*1 - conj(eta)*(-1) = 2 Re eta
    assert f.tensor[0, 1] == pytest.approx(np.exp(-0.4))
    assert f.tensor[0, 0] == 1.0 and f.tensor[1, 1] == 1.0


def test_influence_is_one_on_diagonal_pairs_and_beyond_memory():
    eta = _random_table(2)
    for m in (1, 2):
        t = influence_function(eta, m, LAMBDAS).tensor
        for p in range(2):
            np.testing.assert_allclose(t[p, p], np.ones((2, 2)))
    np.testing.assert_array_equal(influence_function(eta, 3, LAMBDAS).tensor, np.ones((2, 2, 2, 2)))
    with pytest.raises(ArgumentError):
        influence_function(eta, -1, LAMBDAS)


def test_uncoupled_bath_gives_identity_cores():
    pt = build_process_tensor(_table(np.zeros(3), 2), 4, LAMBDAS)
    assert pt.max_bond == 1
    for core in pt.cores:
        np.testing.assert_allclose(core[:, :, 0, 0], np.eye(4), atol=1e-12)


def test_mpo_equals_product_of_influence_functions():
    eta = _random_table(3, seed=1, n_steps=3)
    pt = build_process_tensor(eta, 3, LAMBDAS, EXACT)
    i0 = influence_function(eta, 0, LAMBDAS).matrix
    i1 = influence_function(eta, 1, LAMBDAS).matrix
    i2 = influence_function(eta, 2, LAMBDAS).matrix
    dense = _dense(pt)
    for s1, s2, s3 in itertools.product(range(4), repeat=3):
        expected = i0[s1] * i0[s2] * i0[s3] * i1[s2, s1] * i1[s3, s2] * i2[s3, s1]
        assert dense[s1, s2, s3] == pytest.approx(expected, abs=1e-10)


def test_markov_bond_is_bounded_by_liouville_dimension():
    pt = build_process_tensor(_random_table(1, seed=2), 6, LAMBDAS)
    assert pt.max_bond <= 4


def test_restrict_matches_shorter_build():
    eta = _random_table(2, seed=3, n_steps=4)
    long = build_process_tensor(eta, 4, LAMBDAS)
    short = build_process_tensor(eta.with_memory(2), 2, LAMBDAS)
    np.testing.assert_allclose(_dense(restrict(long, 2)), _dense(short), atol=1e-10)
    assert restrict(long, 4) is long
    with pytest.raises(ArgumentError):
        restrict(long, 0)


def test_caps_close_a_trace_preserving_process():
    pt = build_process_tensor(_random_table(2, seed=4), 5, LAMBDAS)
    assert pt.caps[-1][0] == 1.0
    assert complex(np.ravel(pt.caps[0])[0]) == pytest.approx(1.0, abs=1e-10)


def test_rebuild_with_memory():
    eta = _random_table(3, seed=5)
    pt = build_process_tensor(eta, 6, LAMBDAS)
    markov = rebuild_with_memory(pt, 1)
    assert markov.memory_cutoff == 1
    np.testing.assert_allclose(
        _dense(markov), _dense(build_process_tensor(eta.with_memory(1), 6, LAMBDAS)), atol=1e-12
    )


def test_coupling_operator_is_validated():
    eta = _random_table(1)
    with pytest.raises(ArgumentError):
        build_process_tensor(eta, 3, np.array([[0, 1], [0, 0]]))
    with pytest.raises(ShapeError):
        build_process_tensor(eta, 3, np.ones((2, 3)))
    with pytest.raises(ArgumentError):
        build_process_tensor(_random_table(4), 3, LAMBDAS)


def test_cache_builds_once():
    cache = ProcessTensorCache()
    eta = _random_table(2)
    first = cache.get(eta, 4, np.diag(LAMBDAS), EXACT)
    assert cache.get(eta, 4, np.diag(LAMBDAS), EXACT) is first
    assert len(cache) == 1


def test_save_and_load(tmp_path):
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    pt = build_process_tensor(_random_table(2, seed=6), 4, sx)
    path = save(pt, tmp_path / "bath.pteb")
    back = load(path)
    assert back.bonds == pt.bonds
    assert back.eta_checksum == pt.eta_checksum
    np.testing.assert_allclose(back.coupling, sx)
    for a, b in zip(back.cores, pt.cores):
        np.testing.assert_allclose(a, b, atol=1e-6)


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.pteb"
    path.write_bytes(b"XXXX" + bytes(32))
    with pytest.raises(ShapeError):
        load(path)
