import numpy as np
import pytest

from squidcavity import (
    E,
    G,
    PulseKind,
    RabiRates,
    basis_ket,
    blue_propagator,
    carrier_propagator,
    expm_hermitian,
    flat_index,
    idle_propagator,
    is_unitary,
    ket_from_cavity_coefficients,
    propagator,
    red_propagator,
    rwa_hamiltonian,
)
from squidcavity.dynamics import excitation_operator
from squidcavity.hilbert import dimension

RATES = RabiRates(omega1=4.0842e10, omega2_mag=3.1008e6, omega_cavity=1.8837e12,
                  theta=0.4)
KINDS = (PulseKind.CARRIER, PulseKind.RED_SIDEBAND, PulseKind.BLUE_SIDEBAND,
         PulseKind.IDLE)


def test_carrier_pi_half_flips_ground():
    n_max = 3
    t = np.pi / (2 * RATES.omega1)
    out = carrier_propagator(t, RATES, n_max) @ basis_ket(G, 0, n_max).amplitudes
    expected = 1j * basis_ket(E, 0, n_max).amplitudes
    assert np.abs(out - expected).max() < 1e-12


def test_carrier_zero_time_is_identity():
    assert np.allclose(carrier_propagator(0.0, RATES, 4), np.eye(dimension(4)))


def test_carrier_pi_quarter_equal_weights():
    n_max = 3
    t = np.pi / (4 * RATES.omega1)
    out = carrier_propagator(t, RATES, n_max) @ basis_ket(G, 0, n_max).amplitudes
    g0 = out[flat_index(G, 0, n_max)]
    e0 = out[flat_index(E, 0, n_max)]
    assert abs(g0 - np.cos(np.pi / 4)) < 1e-12
    assert abs(e0 - 1j * np.sin(np.pi / 4)) < 1e-12


def test_red_pi_half_emits_photon():
    n_max = 3
    t = np.pi / (2 * RATES.omega2_mag)
    out = red_propagator(t, RATES, n_max) @ basis_ket(E, 0, n_max).amplitudes
    expected = -1j * np.exp(-1j * RATES.theta) * basis_ket(G, 1, n_max).amplitudes
    assert np.abs(out - expected).max() < 1e-12


def test_red_zero_time_is_identity():
    assert np.allclose(red_propagator(0.0, RATES, 4), np.eye(dimension(4)))


def test_red_vacuum_ground_invariant():
    t = 0.723 / RATES.omega2_mag
    out = red_propagator(t, RATES, 5) @ basis_ket(G, 0, 5).amplitudes
    assert np.abs(out - basis_ket(G, 0, 5).amplitudes).max() < 1e-14


def test_red_matches_expm_oracle_transfer_populations():
    n_max = 8
    rng = np.random.default_rng(5)
    h = rwa_hamiltonian(PulseKind.RED_SIDEBAND, RATES, n_max)
    for n in range(4):
        for t in rng.uniform(0.0, 4.0 / RATES.omega2_mag, size=4):
            u_closed = red_propagator(t, RATES, n_max)
            u_oracle = expm_hermitian(h, t)
            assert np.abs(u_closed - u_oracle).max() < 1e-10
            src = basis_ket(E, n, n_max).amplitudes
            pop = abs((u_closed @ src)[flat_index(G, n + 1, n_max)]) ** 2
            expected = np.sin(RATES.omega2_mag * t * np.sqrt(n + 1)) ** 2
            assert abs(pop - expected) < 1e-12


def test_blue_pi_half_joint_excitation():
    n_max = 3
    t = np.pi / (2 * RATES.omega2_mag)
    out = blue_propagator(t, RATES, n_max) @ basis_ket(G, 0, n_max).amplitudes
    expected = -1j * np.exp(-1j * RATES.theta) * basis_ket(E, 1, n_max).amplitudes
    assert np.abs(out - expected).max() < 1e-12


def test_blue_matches_expm_oracle():
    n_max = 8
    rng = np.random.default_rng(6)
    h = rwa_hamiltonian(PulseKind.BLUE_SIDEBAND, RATES, n_max)
    for t in rng.uniform(0.0, 4.0 / RATES.omega2_mag, size=8):
        assert np.abs(blue_propagator(t, RATES, n_max) - expm_hermitian(h, t)).max() < 1e-10


def test_idle_examples():
    n_max = 3
    assert np.allclose(idle_propagator(0.0, RATES, n_max), np.eye(dimension(n_max)))
    full_period = 2 * np.pi / RATES.omega_cavity
    assert np.abs(idle_propagator(full_period, RATES, n_max)
                  - np.eye(dimension(n_max))).max() < 1e-12
    half = ket_from_cavity_coefficients([1.0, 1.0], n_max)
    out = idle_propagator(np.pi / RATES.omega_cavity, RATES, n_max) @ half.amplitudes
    expected = ket_from_cavity_coefficients([1.0, -1.0], n_max).amplitudes
    assert np.abs(out - expected).max() < 1e-12


def test_carrier_matches_expm_oracle():
    n_max = 5
    rng = np.random.default_rng(7)
    h = rwa_hamiltonian(PulseKind.CARRIER, RATES, n_max)
    for t in rng.uniform(0.0, 4.0 / RATES.omega1, size=10):
        assert np.abs(carrier_propagator(t, RATES, n_max)
                      - expm_hermitian(h, t)).max() < 1e-12


def test_rwa_hamiltonians_exactly_hermitian():
    for kind in KINDS:
        h = rwa_hamiltonian(kind, RATES, 6)
        assert np.abs(h - h.conj().T).max() == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_propagators_unitary(kind):
    rng = np.random.default_rng(8)
    scale = RATES.omega1 if kind is PulseKind.CARRIER else RATES.omega2_mag
    if kind is PulseKind.IDLE:
        scale = RATES.omega_cavity
    for n_max in (1, 4, 16, 64):
        for t in rng.uniform(0.0, 6.0 / scale, size=3):
            u = propagator(kind, t, RATES, n_max)
            assert is_unitary(u, tol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_same_kind_composition(kind):
    rng = np.random.default_rng(9)
    scale = {PulseKind.CARRIER: RATES.omega1, PulseKind.IDLE: RATES.omega_cavity}.get(
        kind, RATES.omega2_mag)
    for _ in range(5):
        t, s = rng.uniform(0.0, 4.0 / scale, size=2)
        left = propagator(kind, t, RATES, 6) @ propagator(kind, s, RATES, 6)
        right = propagator(kind, t + s, RATES, 6)
        assert np.abs(left - right).max() < 1e-10


def test_emission_probability_law():
    n_max = 8
    rng = np.random.default_rng(10)
    for n in range(5):
        for t in rng.uniform(0.0, 3.0 / RATES.omega2_mag, size=16):
            u = red_propagator(t, RATES, n_max)
            amp = u[flat_index(G, n + 1, n_max), flat_index(E, n, n_max)]
            expected = np.sin(RATES.omega2_mag * t * np.sqrt(n + 1)) ** 2
            assert abs(abs(amp) ** 2 - expected) < 1e-12


@pytest.mark.parametrize("kind", (PulseKind.RED_SIDEBAND, PulseKind.BLUE_SIDEBAND))
def test_sideband_conserves_excitation_number(kind):
    n_max = 7
    op = excitation_operator(kind, n_max)
    rng = np.random.default_rng(11)
    for t in rng.uniform(0.0, 3.0 / RATES.omega2_mag, size=5):
        u = propagator(kind, t, RATES, n_max)
        comm = u @ op - op @ u
        interior = dimension(n_max - 1)
        assert np.abs(comm[:interior, :interior]).max() < 1e-12


def test_truncation_edge_states_fixed():
    n_max = 4
    t = 0.913 / RATES.omega2_mag
    u_red = red_propagator(t, RATES, n_max)
    top = flat_index(E, n_max, n_max)
    assert abs(u_red[top, top] - 1.0) < 1e-15
    u_blue = blue_propagator(t, RATES, n_max)
    top_g = flat_index(G, n_max, n_max)
    assert abs(u_blue[top_g, top_g] - 1.0) < 1e-15


def test_negative_duration_rejected():
    with pytest.raises(ValueError):
        propagator(PulseKind.CARRIER, -1.0, RATES, 3)
