import numpy as np
import pytest

from squidcavity import (
    E,
    G,
    HermiticityViolation,
    IndexOutOfRange,
    Ket,
    basis_ket,
    basis_state,
    dimension,
    expm_hermitian,
    fidelity,
    flat_index,
    is_hermitian,
    is_unitary,
    ket_from_cavity_coefficients,
    ladder_operators,
    vacuum,
)
from squidcavity.errors import DimensionMismatch


def test_flat_index_fixed_convention():
    assert flat_index(G, 0, 5) == 0
    assert flat_index(E, 0, 5) == 1
    assert flat_index(G, 3, 5) == 6


def test_flat_index_roundtrip_bijection():
    n_max = 7
    seen = set()
    for n in range(n_max + 1):
        for q in (G, E):
            i = flat_index(q, n, n_max)
            assert basis_state(i, n_max) == (q, n)
            seen.add(i)
    assert seen == set(range(dimension(n_max)))


def test_flat_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        flat_index(G, 6, 5)
    with pytest.raises(IndexOutOfRange):
        basis_state(dimension(5), 5)


def test_ladder_on_basis_states():
    n_max = 4
    a, a_dag = ladder_operators(n_max)
    one = basis_ket(G, 1, n_max).amplitudes
    zero = basis_ket(G, 0, n_max).amplitudes
    assert np.allclose(a @ one, zero)          # sqrt(1) = 1
    assert np.allclose(a @ zero, 0.0)          # vacuum annihilation
    three = basis_ket(G, 3, n_max).amplitudes
    two = basis_ket(G, 2, n_max).amplitudes
    assert abs(np.vdot(two, a @ three) - np.sqrt(3)) < 1e-15
    assert np.allclose(a_dag, a.conj().T)


def test_ladder_commutator_on_interior_block():
    n_max = 6
    a, a_dag = ladder_operators(n_max)
    comm = a @ a_dag - a_dag @ a
    for n in range(n_max):
        for q in (G, E):
            i = flat_index(q, n, n_max)
            assert abs(comm[i, i] - 1.0) < 1e-14
    # the truncation artifact sits only on the top photon row
    top = flat_index(G, n_max, n_max)
    assert abs(comm[top, top] + n_max) < 1e-12


def _random_hermitian(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return m + m.conj().T


def test_expm_identity_at_zero_time():
    rng = np.random.default_rng(1)
    h = _random_hermitian(rng, 6)
    assert np.allclose(expm_hermitian(h, 0.0), np.eye(6), atol=1e-14)


def test_expm_diagonal_number_form():
    # hbar w n diagonal -> phases e^{-i n w t}
    from scipy.constants import hbar

    w, t = 2.0, 0.7
    h = hbar * w * np.diag(np.arange(5.0)).astype(complex)
    u = expm_hermitian(h, t)
    expected = np.diag(np.exp(-1j * np.arange(5) * w * t))
    assert np.abs(u - expected).max() < 1e-12


def test_expm_unitarity_random():
    rng = np.random.default_rng(2)
    from scipy.constants import hbar

    for _ in range(5):
        h = hbar * _random_hermitian(rng, 8)
        u = expm_hermitian(h, 1.0)
        assert is_unitary(u, tol=1e-12)


def test_expm_composition_law():
    rng = np.random.default_rng(3)
    from scipy.constants import hbar

    for _ in range(5):
        h = hbar * _random_hermitian(rng, 6)
        t, s = rng.uniform(0.1, 2.0, size=2)
        u = expm_hermitian(h, t) @ expm_hermitian(h, s)
        assert np.abs(u - expm_hermitian(h, t + s)).max() < 1e-10


def test_expm_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(HermiticityViolation):
        expm_hermitian(m, 1.0)


def test_hermiticity_check_is_relative_to_scale():
    h = 1e-24 * np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    assert not is_hermitian(h)  # tiny but genuinely non-Hermitian


def test_fidelity_examples():
    psi = ket_from_cavity_coefficients([0.6, 0.8j], 3)
    assert abs(fidelity(psi, psi) - 1.0) < 1e-14
    assert fidelity(basis_ket(G, 0, 3), basis_ket(E, 0, 3)) == 0.0
    half = ket_from_cavity_coefficients([1.0, 1.0], 3)
    assert abs(fidelity(basis_ket(G, 0, 3), half) - 0.5) < 1e-14


def test_fidelity_symmetric_and_phase_invariant():
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = Ket(rng.standard_normal(8) + 1j * rng.standard_normal(8), 3).normalized()
        y = Ket(rng.standard_normal(8) + 1j * rng.standard_normal(8), 3).normalized()
        assert abs(fidelity(x, y) - fidelity(y, x)) < 1e-14
        rotated = Ket(x.amplitudes * np.exp(1j * 0.37), 3)
        assert abs(fidelity(rotated, y) - fidelity(x, y)) < 1e-14


def test_fidelity_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        fidelity(vacuum(3), vacuum(4))


def test_ket_normalization_invariant():
    v = np.zeros(8, dtype=complex)
    v[0], v[2] = 3.0, 4.0
    k = Ket(v, 3).normalized()
    assert abs(k.norm - 1.0) < 1e-12
    with pytest.raises(ValueError):
        Ket(np.full(8, np.nan, dtype=complex), 3)
