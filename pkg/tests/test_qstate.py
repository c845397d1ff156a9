import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alaw.entropy import entropy_of
from alaw.errors import DomainError
from alaw.qstate import (
    ChainState,
    DensityOperator,
    Partition,
    Region,
    load_state,
    make_bell_chain,
    make_ghz,
    make_product,
    make_random_mps,
    make_tfim_ground,
    merge,
    placements,
    reduce,
    split,
    tfim_hamiltonian,
)
from conftest import dense_reduce, random_state


def test_reduce_product_zero():
    rho = reduce(make_product(2), [0]).matrix
    assert np.allclose(rho, np.diag([1, 0]))


def test_reduce_bell_pair_maximally_mixed():
    rho = reduce(make_bell_chain(1), [0]).matrix
    assert np.allclose(rho, np.eye(2) / 2)


def test_reduce_ghz3_two_sites():
    rho = reduce(make_ghz(3), [0, 1]).matrix
    assert np.allclose(rho, np.diag([0.5, 0, 0, 0.5]))


@pytest.mark.parametrize("sites", [[0], [2], [1, 3], [0, 2, 3], [4, 1]])
def test_reduce_matches_summation_oracle(sites):
    state = random_state(5, 7)
    assert np.allclose(reduce(state, sites).matrix, dense_reduce(state.amplitudes, 5, sites),
                       atol=1e-12)


def test_reduce_nesting():
    state = random_state(6, 3)
    outer = reduce(state, [1, 2, 4]).matrix.reshape(2, 2, 2, 2, 2, 2)
    # axes of a 3-site region: (site4, site2, site1) for rows and columns
    inner = np.einsum("abcdbf->acdf", outer).reshape(4, 4)
    assert np.allclose(inner, reduce(state, [1, 4]).matrix, atol=1e-12)


def test_split_merge_roundtrip():
    state = random_state(6, 11)
    m = split(state.amplitudes, 6, [0, 3, 5])
    assert m.shape == (8, 8)
    assert np.array_equal(merge(m, 6, [0, 3, 5]), state.amplitudes)


def test_little_endian_convention():
    psi = np.zeros(8, dtype=complex)
    psi[1] = 1  # site 0 up
    state = ChainState(3, psi)
    assert np.allclose(reduce(state, [0]).matrix, np.diag([0, 1]))
    assert np.allclose(reduce(state, [2]).matrix, np.diag([1, 0]))


def test_make_product_zero_angles():
    psi = make_product(4).amplitudes
    assert psi[0] == 1 and np.count_nonzero(psi) == 1


def test_make_product_tensor_oracle():
    t = 0.37
    v = np.array([math.cos(t), math.sin(t)])
    assert np.allclose(make_product(3, [t, t, t]).amplitudes, np.kron(np.kron(v, v), v))


def test_product_entropies_zero():
    state = make_product(6, [0.1, 0.5, 0.9, 1.3, 0.2, 0.7])
    for k in range(1, 6):
        assert entropy_of(state, Region.block(0, k)) == pytest.approx(0, abs=1e-10)


def test_bell_counting():
    state = make_bell_chain(3)
    assert entropy_of(state, [1, 2, 3, 4]) == pytest.approx(2)
    for start in range(6):
        for length in range(1, 6 - start):
            cut = (start % 2 == 1) + ((start + length) % 2 == 1)
            assert entropy_of(state, Region.block(start, length)) == pytest.approx(cut)


def test_ghz_entropy_one():
    state = make_ghz(5)
    assert entropy_of(state, [0, 3]) == pytest.approx(1)
    assert entropy_of(state, [1, 2, 4]) == pytest.approx(1)


def test_random_mps_rank_bound_and_determinism():
    a = make_random_mps(8, 3, 5)
    b = make_random_mps(8, 3, 5)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    for k in range(1, 8):
        assert entropy_of(a, Region.block(0, k)) <= math.log2(3) + 1e-9
    prod = make_random_mps(6, 1, 0)
    assert entropy_of(prod, [0, 1, 2]) == pytest.approx(0, abs=1e-10)


def test_tfim_large_field_and_variational():
    state = make_tfim_ground(8, 200.0)
    assert entropy_of(state, Region.block(0, 4)) < 1e-4
    s2 = make_tfim_ground(8, 2.0)
    ham = tfim_hamiltonian(8, 2.0)
    plus = np.ones(256) / 16
    e_plus = float(plus @ (ham @ plus))
    psi = s2.amplitudes
    assert float(np.vdot(psi, ham @ psi).real) <= e_plus


def test_tfim_correlator_decays():
    state = make_tfim_ground(10, 2.0)
    z = lambda site: 1 - 2 * ((np.arange(1024) >> site) & 1)  # noqa: E731
    p = np.abs(state.amplitudes) ** 2
    c = []
    for d in range(1, 8):
        i, j = 1, 1 + d
        c.append(abs(np.sum(p * z(i) * z(j)) - np.sum(p * z(i)) * np.sum(p * z(j))))
    assert all(x > y for x, y in zip(c[1:], c[2:]))


def test_tfim_domain():
    with pytest.raises(DomainError):
        make_tfim_ground(3, 2.0)
    with pytest.raises(DomainError):
        make_tfim_ground(8, 0.5)


def test_state_validation():
    with pytest.raises(DomainError):
        ChainState(2, np.array([1, 1, 0, 0]))
    with pytest.raises(DomainError):
        ChainState(21, np.zeros(1))


def test_save_load_roundtrip(tmp_path):
    from alaw.qstate import save_state

    state = random_state(5, 2)
    path = tmp_path / "s.bin"
    save_state(path, state)
    raw = path.read_bytes()
    assert raw[:8] == b"ALAWSTAT" and int.from_bytes(raw[8:12], "little") == 5
    assert len(raw) == 16 + 16 * 32
    assert np.array_equal(load_state(path).amplitudes, state.amplitudes)
    path.write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(DomainError):
        load_state(path)


def test_partition_roles():
    p = Partition.place(10, 2, 3, 2, 1)
    assert p.b1.sites == (7,)  # the smaller flank is B1
    assert p.b2.sites == (2, 3, 4)
    assert p.a.sites == (5, 6)
    assert p.c.sites == (0, 1, 8, 9)
    assert (p.l_b, p.l_B, p.l_C) == (1, 4, 6)
    with pytest.raises(DomainError):
        Partition.place(6, 0, 2, 2, 2)  # empty C


def test_placements_count():
    parts = list(placements(6, 1, 1))
    assert len(parts) == 4
    assert all(len(p.c) > 0 for p in parts)


def test_density_factor_and_matrix_agree():
    state = random_state(6, 9)
    rho = reduce(state, [0, 1])
    dense = DensityOperator.from_matrix(rho.matrix)
    assert np.allclose(np.sort(rho.spectrum()[0])[-4:], np.sort(dense.spectrum()[0]), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 7), data=st.data())
def test_complement_entropy_equal(seed, n, data):
    state = random_state(n, seed)
    sites = data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n - 1))
    rest = [s for s in range(n) if s not in sites]
    from conftest import reduced_entropy_oracle

    assert reduced_entropy_oracle(state, sites) == pytest.approx(
        reduced_entropy_oracle(state, rest), abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_reduced_operator_invariants(seed):
    state = random_state(5, seed)
    m = reduce(state, [1, 3]).matrix
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    assert abs(np.trace(m).real - 1) < 1e-10
    assert np.linalg.eigvalsh(m).min() > -1e-10
