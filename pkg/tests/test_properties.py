import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from adlab.estimator import group_averaged_operator
from adlab.gevp import assemble_double_commutator, random_hermitian_basis
from adlab.groups import GROUPS, make_group
from adlab.residual import delta_generator
from adlab.transforms import ambiguity, autocorrelation, periodogram

sizes = st.integers(min_value=2, max_value=9)
seeds = st.integers(min_value=0, max_value=2**32 - 1)
group_names = st.sampled_from(sorted(GROUPS))


def _vec(M, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(M) + 1j * rng.standard_normal(M)


def _herm(M, seed):
    X = _vec(M * M, seed).reshape(M, M)
    return X + X.conj().T


def _psd(M, seed):
    X = _vec(M * M, seed).reshape(M, M)
    return X @ X.conj().T


def _unitary(M, seed):
    Q, _ = np.linalg.qr(_vec(M * M, seed).reshape(M, M))
    return Q


settings.register_profile("adlab", max_examples=60, deadline=None)
settings.load_profile("adlab")


@given(sizes, seeds, group_names)
def test_estimator_is_hermitian_psd_with_energy_trace(M, seed, name):
    x = _vec(M, seed)
    F = group_averaged_operator(x, make_group(name, M))
    assert np.allclose(F, F.conj().T, atol=1e-13)
    assert np.linalg.eigvalsh(F).min() >= -1e-12 * np.linalg.norm(x) ** 2
    assert np.isclose(np.trace(F).real, np.linalg.norm(x) ** 2, rtol=1e-12)


@given(sizes, seeds, group_names, st.integers(min_value=0, max_value=80))
def test_estimator_is_group_invariant(M, seed, name, g):
    G = make_group(name, M)
    U = G.element(g % G.order)
    F = group_averaged_operator(_vec(M, seed), G)
    # conjugation invariance holds up to the projective phase, which cancels
    assert np.allclose(U @ F @ U.conj().T, F, atol=1e-12 * max(1.0, np.abs(F).max()))


@given(sizes, seeds, group_names, st.complex_numbers(min_magnitude=0.1, max_magnitude=10,
                                                     allow_nan=False, allow_infinity=False))
def test_estimator_is_quadratic(M, seed, name, c):
    x = _vec(M, seed)
    G = make_group(name, M)
    assert np.allclose(group_averaged_operator(c * x, G),
                       abs(c) ** 2 * group_averaged_operator(x, G), rtol=1e-10, atol=1e-12)


@given(sizes, seeds, st.floats(min_value=1e-3, max_value=1e3),
       st.floats(min_value=1e-3, max_value=1e3))
def test_delta_is_scale_invariant(M, seed, a, r):
    A, R = _herm(M, seed), _psd(M, seed + 1)
    base = delta_generator(A, R)
    assert np.isclose(delta_generator(a * A, r * R), base, rtol=1e-9, atol=1e-15)


@given(sizes, seeds)
def test_delta_is_unitarily_invariant(M, seed):
    A, R, U = _herm(M, seed), _psd(M, seed + 1), _unitary(M, seed + 2)
    lhs = delta_generator(U @ A @ U.conj().T, U @ R @ U.conj().T)
    assert np.isclose(lhs, delta_generator(A, R), rtol=1e-9, atol=1e-14)


@given(sizes, seeds)
def test_delta_in_range_and_zero_for_functions_of_R(M, seed):
    A, R = _herm(M, seed), _psd(M, seed + 1)
    assert 0.0 <= delta_generator(A, R) <= np.sqrt(2.0) + 1e-12
    assert delta_generator(R @ R + 3 * R, R) <= 1e-12


@given(sizes, seeds)
def test_delta_matches_oracle(M, seed):
    A, R = _herm(M, seed), _psd(M, seed + 1)
    assert np.isclose(delta_generator(A, R), oracles.delta([A], R), rtol=1e-10, atol=1e-15)


@given(st.integers(min_value=2, max_value=5), seeds, st.integers(min_value=1, max_value=6))
def test_double_commutator_is_psd_and_matches_delta(M, seed, d):
    d = min(d, M * M - 1)
    R = _psd(M, seed)
    B = random_hermitian_basis(M, d, seed + 1)
    Mmat, Nmat = assemble_double_commutator(R, B)
    assert np.allclose(Mmat, Mmat.T)
    scale = np.linalg.norm(R) ** 2 * np.max(np.linalg.eigvalsh(Nmat))
    assert np.linalg.eigvalsh(Mmat).min() >= -1e-10 * scale
    c = np.random.default_rng(seed + 2).standard_normal(d)
    A = np.tensordot(c, B.matrices, axes=1)
    if np.linalg.norm(A) > 1e-8:
        rq = oracles.rayleigh(Mmat, Nmat, c)
        assert np.isclose(rq, (delta_generator(A, R) * np.linalg.norm(R)) ** 2,
                          rtol=1e-8, atol=1e-10 * scale)


@given(sizes, seeds, st.floats(min_value=0.01, max_value=10))
def test_wiener_khinchin(M, seed, dt):
    from adlab.model import Signal
    s = Signal(_vec(M, seed), dt)
    lhs = np.fft.fft(autocorrelation(s))
    assert np.allclose(lhs, M * periodogram(s), atol=1e-10 * max(1.0, np.abs(lhs).max()))


@given(sizes, seeds)
def test_moyal_identity(M, seed):
    x = _vec(M, seed)
    A = ambiguity(x).values
    assert np.isclose(np.sum(np.abs(A) ** 2), M * np.linalg.norm(x) ** 4, rtol=1e-10)
