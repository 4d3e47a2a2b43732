"""Closed-form 2x2 arithmetic against independent oracles."""
import numpy as np
import pytest

from qubitctl import mat2
from qubitctl.mat2 import I2, SIGMA_X, SIGMA_Y, SIGMA_Z


def random_hermitian(rng):
    return mat2.pauli_compose(*rng.uniform(-1.0, 1.0, 4))


def random_matrix(rng):
    return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))


# ---------------------------------------------------------------- decompose


def test_pauli_decompose_basis_elements():
    assert np.allclose(mat2.pauli_decompose(SIGMA_X), (0, 1, 0, 0), atol=1e-15)
    assert np.allclose(mat2.pauli_decompose(I2), (1, 0, 0, 0), atol=1e-15)
    assert np.allclose(mat2.pauli_decompose(SIGMA_Z + SIGMA_X), (0, 1, 0, 1), atol=1e-15)


def test_pauli_round_trip_exact():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = random_matrix(rng)
        c = mat2.pauli_decompose(a)
        assert np.abs(mat2.pauli_compose(*c) - a).max() < 1e-14


def test_hermitian_iff_real_coefficients():
    rng = np.random.default_rng(1)
    for _ in range(50):
        h = random_hermitian(rng)
        c = mat2.pauli_decompose(h)
        assert max(abs(x.imag) for x in c) < 1e-12
        g = random_matrix(rng)
        g = g + 0.5j * SIGMA_Y  # guarantee a non-Hermitian part
        if mat2.is_hermitian(g):
            continue
        c = mat2.pauli_decompose(g)
        assert max(abs(x.imag) for x in c) > 1e-12


def test_predicates():
    assert mat2.is_hermitian(SIGMA_X)
    assert not mat2.is_hermitian(1j * SIGMA_X)
    assert mat2.is_unitary(SIGMA_Y)
    assert not mat2.is_unitary(2 * I2)
    assert mat2.is_traceless(SIGMA_Z)
    assert not mat2.is_traceless(I2)


# ---------------------------------------------------------------- exponential


def test_expm_full_rotation():
    assert np.abs(mat2.expm_unitary(SIGMA_Z, np.pi) + I2).max() < 1e-12


def test_expm_zero_hamiltonian():
    assert np.abs(mat2.expm_unitary(np.zeros((2, 2)), 1.7) - I2).max() < 1e-15


def test_expm_half_rotation():
    assert np.abs(mat2.expm_unitary(SIGMA_X, np.pi / 2) + 1j * SIGMA_X).max() < 1e-12


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        mat2.expm_unitary(np.array([[0, 1], [0, 0]]), 1.0)
    with pytest.raises(ValueError):
        mat2.expm_unitary(SIGMA_Z, np.inf)


def test_expm_unitary_and_group_properties():
    rng = np.random.default_rng(2)
    for _ in range(100):
        h = random_hermitian(rng)
        dt1, dt2 = rng.uniform(-3.0, 3.0, 2)
        u1 = mat2.expm_unitary(h, dt1)
        assert np.abs(u1.conj().T @ u1 - I2).max() < 1e-12
        assert np.abs(u1 @ mat2.expm_unitary(h, -dt1) - I2).max() < 1e-12
        u12 = mat2.expm_unitary(h, dt1 + dt2)
        assert np.abs(u12 - u1 @ mat2.expm_unitary(h, dt2)).max() < 1e-12


def test_expm_matches_scipy_style_series():
    # independent oracle: dense series evaluation of exp(-i H dt)
    rng = np.random.default_rng(3)
    for _ in range(20):
        h = random_hermitian(rng)
        dt = rng.uniform(-2.0, 2.0)
        m = -1j * h * dt
        series = np.eye(2, dtype=complex)
        term = np.eye(2, dtype=complex)
        for k in range(1, 40):
            term = term @ m / k
            series = series + term
        assert np.abs(mat2.expm_unitary(h, dt) - series).max() < 1e-12


# ---------------------------------------------------------------- dexp


def test_dexp_commuting_case():
    dt = 0.37
    expected = -1j * dt * mat2.expm_unitary(SIGMA_Z, dt) @ SIGMA_Z
    assert np.abs(mat2.dexp_direction(SIGMA_Z, SIGMA_Z, dt) - expected).max() < 1e-13


def test_dexp_zero_time():
    rng = np.random.default_rng(4)
    d = mat2.dexp_direction(random_hermitian(rng), random_hermitian(rng), 0.0)
    assert np.abs(d).max() == 0.0


def test_dexp_finite_difference_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        h = random_hermitian(rng)
        v = random_hermitian(rng)
        dt = rng.uniform(0.05, 2.5)
        d = mat2.dexp_direction(h, v, dt)
        eps = 1e-5
        fd = (mat2.expm_unitary(h + eps * v, dt) - mat2.expm_unitary(h - eps * v, dt)) / (
            2 * eps
        )
        worst = max(worst, np.abs(d - fd).max() / max(np.abs(d).max(), 1e-30))
    assert worst < 1e-7


def test_dexp_near_degenerate_spectrum():
    # eigenvalue gap ~1e-13: the sinc form must stay at the confluent limit
    h = mat2.pauli_compose(0.3, 1e-13, 0.0, 0.0)
    v = mat2.pauli_compose(0.0, 1.0, 0.5, -0.2)
    d = mat2.dexp_direction(h, v, 1.1)
    confluent = -1j * 1.1 * np.exp(-1j * 0.3 * 1.1) * v
    assert np.abs(d - confluent).max() < 1e-10


def test_dexp_rejects_non_hermitian_direction():
    with pytest.raises(ValueError):
        mat2.dexp_direction(SIGMA_Z, np.array([[0, 1], [0, 0]]), 1.0)


# ---------------------------------------------------------------- norms, rank


def test_spectral_norm_examples():
    assert abs(mat2.spectral_norm(SIGMA_Z) - 1.0) < 1e-14
    assert abs(mat2.spectral_norm(2 * I2) - 2.0) < 1e-14


def test_spectral_norm_svd_oracle():
    rng = np.random.default_rng(6)
    for _ in range(100):
        a = random_matrix(rng)
        expected = np.linalg.svd(a, compute_uv=False)
        s1, s2 = mat2.singular_values(a)
        assert abs(s1 - expected[0]) < 1e-12
        assert abs(s2 - expected[1]) < 1e-12


def test_complex_rank_examples():
    assert mat2.complex_rank([I2, SIGMA_X, SIGMA_Y, SIGMA_Z]) == 4
    assert mat2.complex_rank([I2, I2]) == 1
    h0 = SIGMA_Z + SIGMA_X
    v = SIGMA_X
    comm = mat2.commutator(h0, v)
    f0 = -1.0
    e = mat2.commutator(h0, comm) + f0 * mat2.commutator(v, comm)
    assert mat2.complex_rank([I2, v, comm, e]) == 3


def test_complex_rank_conjugation_invariance():
    rng = np.random.default_rng(7)
    for _ in range(25):
        family = [random_matrix(rng) for _ in range(4)]
        u = mat2.expm_unitary(random_hermitian(rng), rng.uniform(0.1, 2.0))
        conjugated = [u.conj().T @ m @ u for m in family]
        assert mat2.complex_rank(family) == mat2.complex_rank(conjugated)


def test_complex_rank_rejects_bad_families():
    with pytest.raises(ValueError):
        mat2.complex_rank([])
    with pytest.raises(ValueError):
        mat2.complex_rank([I2] * 9)


def test_commutator_pauli_algebra():
    assert np.abs(mat2.commutator(SIGMA_X, SIGMA_Y) - 2j * SIGMA_Z).max() < 1e-15
    assert np.abs(mat2.commutator(SIGMA_Z, SIGMA_Z)).max() == 0.0
    assert np.abs(mat2.commutator(SIGMA_Z, SIGMA_X) - 2j * SIGMA_Y).max() < 1e-15
