"""Closed-form propagators for the four pulse kinds and their RWA Hamiltonians.

Carrier: U_C(t) = cos(O1 t) I + i sin(O1 t)(|g><e| + |e><g|), photon-diagonal.
Red sideband: 2x2 rotation on each rung {|e,n>, |g,n+1>} by |O2| t sqrt(n+1)
with off-diagonal phases -i e^{+-i theta}.  Blue sideband: same with the
qubit roles swapped, rungs {|g,n>, |e,n+1>}.  Idle: free cavity phases
e^{-i n w t}, an artifact extension used by the compiler for phase control.

The unpaired state at the truncation edge of each sideband maps to itself,
which keeps every propagator exactly unitary; with the guard band required
by the compiler the edge is never populated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar as HBAR

from .errors import DimensionMismatch
from .hilbert import E, G, dimension, flat_index, ladder_operators, number_operator


class PulseKind(str, enum.Enum):
    CARRIER = "Carrier"
    RED_SIDEBAND = "RedSideband"
    BLUE_SIDEBAND = "BlueSideband"
    IDLE = "Idle"


@dataclass(frozen=True)
class RabiRates:
    """Rabi rates of the three pulse processes plus the cavity frequency.

    omega1 = E_J / hbar drives the carrier; omega2_mag and theta are the
    magnitude and phase of the sideband rate; omega_cavity sets idle phases.
    """

    omega1: float
    omega2_mag: float
    omega_cavity: float
    theta: float = 0.0

    def __post_init__(self):
        if self.omega1 <= 0:
            raise ValueError(f"omega1 must be positive, got {self.omega1}")
        if self.omega2_mag < 0:
            raise ValueError(f"omega2_mag must be >= 0, got {self.omega2_mag}")
        if self.omega_cavity <= 0:
            raise ValueError(
                f"omega_cavity must be positive, got {self.omega_cavity}"
            )
        if not -math.pi < self.theta <= math.pi:
            object.__setattr__(
                self, "theta", math.atan2(math.sin(self.theta), math.cos(self.theta))
            )


def carrier_propagator(t: float, rates: RabiRates, n_max: int) -> np.ndarray:
    """Qubit rotation at fixed photon number."""
    d = dimension(n_max)
    u = np.zeros((d, d), dtype=complex)
    c = np.cos(rates.omega1 * t)
    s = np.sin(rates.omega1 * t)
    for n in range(n_max + 1):
        g, e = flat_index(G, n, n_max), flat_index(E, n, n_max)
        u[g, g] = c
        u[e, e] = c
        u[g, e] = 1j * s
        u[e, g] = 1j * s
    return u


def red_propagator(t: float, rates: RabiRates, n_max: int) -> np.ndarray:
    """Resonant exchange |e,n> <-> |g,n+1> (photon emission by the qubit)."""
    d = dimension(n_max)
    u = np.zeros((d, d), dtype=complex)
    u[flat_index(G, 0, n_max), flat_index(G, 0, n_max)] = 1.0
    u[flat_index(E, n_max, n_max), flat_index(E, n_max, n_max)] = 1.0
    eith = np.exp(1j * rates.theta)
    for n in range(n_max):
        e, g1 = flat_index(E, n, n_max), flat_index(G, n + 1, n_max)
        phi = rates.omega2_mag * t * np.sqrt(n + 1)
        c, s = np.cos(phi), np.sin(phi)
        u[e, e] = c
        u[g1, g1] = c
        u[e, g1] = -1j * eith * s
        u[g1, e] = -1j * np.conj(eith) * s
    return u


def blue_propagator(t: float, rates: RabiRates, n_max: int) -> np.ndarray:
    """Resonant exchange |g,n> <-> |e,n+1> (joint excitation)."""
    d = dimension(n_max)
    u = np.zeros((d, d), dtype=complex)
    u[flat_index(E, 0, n_max), flat_index(E, 0, n_max)] = 1.0
    u[flat_index(G, n_max, n_max), flat_index(G, n_max, n_max)] = 1.0
    eith = np.exp(1j * rates.theta)
    for n in range(n_max):
        g, e1 = flat_index(G, n, n_max), flat_index(E, n + 1, n_max)
        phi = rates.omega2_mag * t * np.sqrt(n + 1)
        c, s = np.cos(phi), np.sin(phi)
        u[g, g] = c
        u[e1, e1] = c
        u[g, e1] = -1j * eith * s
        u[e1, g] = -1j * np.conj(eith) * s
    return u


def idle_propagator(t: float, rates: RabiRates, n_max: int) -> np.ndarray:
    """Free cavity evolution with the coupling switched off: |q,n> -> e^{-i n w t}|q,n>."""
    d = dimension(n_max)
    photon = np.arange(d) // 2
    return np.diag(np.exp(-1j * photon * rates.omega_cavity * t))


_PROPAGATORS = {
    PulseKind.CARRIER: carrier_propagator,
    PulseKind.RED_SIDEBAND: red_propagator,
    PulseKind.BLUE_SIDEBAND: blue_propagator,
    PulseKind.IDLE: idle_propagator,
}


def propagator(kind: PulseKind, t: float, rates: RabiRates, n_max: int) -> np.ndarray:
    """Closed-form propagator for one pulse step."""
    if t < 0:
        raise ValueError(f"pulse duration must be >= 0, got {t}")
    return _PROPAGATORS[PulseKind(kind)](t, rates, n_max)


def rwa_hamiltonian(kind: PulseKind, rates: RabiRates, n_max: int) -> np.ndarray:
    """Piecewise-constant Hamiltonian whose exponential is the closed form.

    Signs are fixed so that expm_hermitian(H, t) reproduces the propagators
    above: H_carrier = -hbar O1 (s+ + s-), H_red = hbar (O2 a s+ + h.c.),
    H_blue the mirrored form, H_idle = hbar w a†a.
    """
    kind = PulseKind(kind)
    d = dimension(n_max)
    if kind is PulseKind.CARRIER:
        h = np.zeros((d, d), dtype=complex)
        for n in range(n_max + 1):
            g, e = flat_index(G, n, n_max), flat_index(E, n, n_max)
            h[g, e] = -HBAR * rates.omega1
            h[e, g] = -HBAR * rates.omega1
        return h
    if kind is PulseKind.IDLE:
        return HBAR * rates.omega_cavity * number_operator(n_max)
    omega2 = rates.omega2_mag * np.exp(1j * rates.theta)
    a, a_dag = ladder_operators(n_max)
    from .hilbert import qubit_sigma_minus, qubit_sigma_plus

    s_minus = qubit_sigma_minus(n_max)
    s_plus = qubit_sigma_plus(n_max)
    if kind is PulseKind.RED_SIDEBAND:
        half = omega2 * (a @ s_plus)
    else:
        half = omega2 * (a @ s_minus)
    return HBAR * (half + half.conj().T)


def excitation_operator(kind: PulseKind, n_max: int) -> np.ndarray:
    """Quantity conserved by each sideband: a†a + |e><e| (red), a†a - |e><e| (blue)."""
    kind = PulseKind(kind)
    d = dimension(n_max)
    proj_e = np.diag(np.array([1.0 if i % 2 == E else 0.0 for i in range(d)]))
    if kind is PulseKind.RED_SIDEBAND:
        return number_operator(n_max) + proj_e
    if kind is PulseKind.BLUE_SIDEBAND:
        return number_operator(n_max) - proj_e
    raise ValueError(f"no conserved excitation operator defined for {kind}")
