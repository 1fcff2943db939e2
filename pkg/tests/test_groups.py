import numpy as np
import pytest

import oracles
from adlab.groups import (GROUPS, GroupRep, check_haar, chirp_conj_shift_generator,
                          cyclic_group, dihedral_group, log_diag_generator, make_generator,
                          make_group, modulation_matrix, multiplication_table, reversal_group,
                          reversal_matrix, shift_generator, shift_matrix, tf_lattice_group,
                          unitarity_defect)


@pytest.mark.parametrize("name", sorted(GROUPS))
@pytest.mark.parametrize("M", [2, 3, 5])
def test_elements_match_oracle(name, M):
    G = make_group(name, M)
    ref = oracles.group_elements(name, M)
    assert G.order == len(ref)
    for U, V in zip(G.elements, ref):
        assert np.allclose(U, V)
    assert G.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_cyclic_m2():
    G = cyclic_group(2)
    assert np.allclose(G.element(0), np.eye(2))
    assert np.allclose(G.element(1), [[0, 1], [1, 0]])


def test_cyclic_traces_and_closure():
    M = 7
    G = cyclic_group(M)
    traces = [np.trace(U).real for U in G.elements]
    assert traces[0] == M and all(t == 0 for t in traces[1:])
    P = shift_matrix(M)
    assert np.allclose(np.linalg.matrix_power(P, M), np.eye(M))
    x = np.arange(M)
    assert np.array_equal((P @ x).real, np.roll(x, 1))


def test_dihedral_relations():
    M = 5
    J, P = reversal_matrix(M), shift_matrix(M)
    assert np.allclose(J @ J, np.eye(M))
    assert np.allclose(J @ P @ J, np.linalg.inv(P))


def test_dihedral_m2_distinct_elements():
    G = dihedral_group(2)
    assert G.order == 4
    distinct = {tuple(np.round(U, 12).ravel().tolist()) for U in G.elements}
    # at M = 2 the reflection equals the shift, so only {I, P} survive
    assert len(distinct) == 2


def test_reversal_group():
    G = reversal_group(4)
    assert G.order == 2 and np.allclose(G.weights, 0.5)


def test_tf_lattice():
    M = 4
    G = tf_lattice_group(M)
    assert G.order == M * M and G.projective
    assert np.allclose(G.element(0), np.eye(M))
    assert unitarity_defect(G) <= 1e-10 * M
    W, P = modulation_matrix(M), shift_matrix(M)
    assert np.allclose(W @ P, np.exp(2j * np.pi / M) * P @ W)


@pytest.mark.parametrize("name,M", [("cyclic", 6), ("dihedral", 5), ("reversal", 8),
                                    ("trivial", 4), ("tf-lattice", 4)])
def test_closure_and_haar(name, M):
    G = make_group(name, M)
    table = multiplication_table(G)
    assert np.all(table >= 0)
    assert any(np.allclose(U, np.eye(M)) for U in G.elements)
    assert check_haar(G, table)


def test_unitarity_all_groups():
    for name in GROUPS:
        G = make_group(name, 6)
        assert unitarity_defect(G) <= 1e-10 * 6


def test_lazy_storage_cap(monkeypatch):
    monkeypatch.setenv("ADLAB_MAX_GROUP_BYTES", "1000")
    G = tf_lattice_group(8)
    assert G.lazy
    with pytest.raises(MemoryError):
        G.elements
    # lazy element access still works
    assert np.allclose(G.element(9), oracles.group_elements("tf-lattice", 8)[9])


def test_act_and_orbit_agree_with_dense():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    G = tf_lattice_group(5)
    Y = G.orbit(x)
    for g in range(G.order):
        assert np.allclose(Y[:, g], G.element(g) @ x)
        assert np.allclose(G.act(g, x), G.element(g) @ x)


def test_from_matrices_roundtrip():
    mats = oracles.group_elements("dihedral", 4)
    G = GroupRep.from_matrices("d4", mats)
    assert G.order == 8 and check_haar(G)


def test_unknown_group():
    with pytest.raises(Exception):
        make_group("sphere", 4)


def test_shift_pair_parts_rebuild_shift_and_commute():
    for M in (3, 4, 8):
        H1, H2 = shift_generator(M).parts
        assert np.allclose(H1 + 1j * H2, shift_matrix(M))
        # P is normal, so its Hermitian parts commute
        assert np.linalg.norm(H1 @ H2 - H2 @ H1) < 1e-12


def test_log_diag():
    D = log_diag_generator(6).matrix
    assert np.allclose(D, np.diag(np.log(np.arange(1, 7))))
    assert D[0, 0] == 0.0


def test_chirp_pair_reduces_to_shift_at_zero_rate():
    a = chirp_conj_shift_generator(8, 0.0).parts
    b = shift_generator(8).parts
    for P, Q in zip(a, b):
        assert np.array_equal(P, Q)


def test_make_generator_names():
    for name in ("shift", "logdiag", "chirpshift"):
        assert make_generator(name, 6, beta=0.1).name == name
    with pytest.raises(Exception):
        make_generator("rotate", 6)
