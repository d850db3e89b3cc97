"""Density-matrix integrator for dissipative sanity checks.

Standard zero-temperature dissipators: cavity decay sqrt(kappa) a, qubit
relaxation sqrt(gamma1) sigma-, pure dephasing sqrt(gamma_phi/2) sigma_z.
Fixed-step classical 4th-order integration; dimensions stay tiny, so
reproducibility beats adaptivity here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar as HBAR

from .compiler import PulseSequence
from .dynamics import rwa_hamiltonian
from .errors import HermiticityViolation, StepTooLarge
from .hilbert import (
    G,
    Ket,
    dimension,
    flat_index,
    is_hermitian,
    ladder_operators,
    qubit_sigma_minus,
    qubit_sigma_z,
)

_STEP_SAFETY = 0.01  # dt <= safety / max(rate, ||H||/hbar)


@dataclass(frozen=True)
class DecayChannels:
    """Decay rates in 1/s: cavity kappa, qubit relaxation gamma1, pure dephasing."""

    kappa: float = 0.0
    gamma1: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "gamma1", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_times(cls, tau_p: float | None = None, T1: float | None = None,
                   T2: float | None = None) -> "DecayChannels":
        """Rates from lifetimes; dephasing clamps at zero for T2 > 2 T1 inputs."""
        kappa = 0.0 if tau_p is None else 1.0 / tau_p
        gamma1 = 0.0 if T1 is None else 1.0 / T1
        gamma_phi = 0.0
        if T2 is not None:
            gamma_phi = max(1.0 / T2 - 0.5 * gamma1, 0.0)
        return cls(kappa=kappa, gamma1=gamma1, gamma_phi=gamma_phi)

    @property
    def max_rate(self) -> float:
        return max(self.kappa, self.gamma1, self.gamma_phi)


def collapse_operators(channels: DecayChannels, n_max: int) -> list[np.ndarray]:
    ops = []
    if channels.kappa > 0:
        a, _ = ladder_operators(n_max)
        ops.append(math.sqrt(channels.kappa) * a)
    if channels.gamma1 > 0:
        ops.append(math.sqrt(channels.gamma1) * qubit_sigma_minus(n_max))
    if channels.gamma_phi > 0:
        ops.append(math.sqrt(channels.gamma_phi / 2.0) * qubit_sigma_z(n_max))
    return ops


def density_from_ket(ket: Ket) -> np.ndarray:
    return np.outer(ket.amplitudes, ket.amplitudes.conj())


def lindblad_rhs(rho: np.ndarray, hamiltonian: np.ndarray,
                 channels: DecayChannels) -> np.ndarray:
    """d rho / dt for the master equation with the standard dissipators."""
    if not is_hermitian(hamiltonian):
        raise HermiticityViolation("lindblad_rhs requires a Hermitian Hamiltonian")
    n_max = rho.shape[0] // 2 - 1
    drho = (-1j / HBAR) * (hamiltonian @ rho - rho @ hamiltonian)
    for op in collapse_operators(channels, n_max):
        op_dag = op.conj().T
        anti = op_dag @ op
        drho += op @ rho @ op_dag - 0.5 * (anti @ rho + rho @ anti)
    return drho


def stable_step(hamiltonian: np.ndarray, channels: DecayChannels) -> float:
    """Largest dt satisfying the fixed-step stability bound."""
    h_scale = float(np.linalg.norm(hamiltonian, 2)) / HBAR
    fastest = max(channels.max_rate, h_scale)
    if fastest == 0.0:
        return math.inf
    return _STEP_SAFETY / fastest


def evolve_density(rho0: np.ndarray, hamiltonian: np.ndarray,
                   channels: DecayChannels, t_final: float,
                   dt: float) -> np.ndarray:
    """Fixed-step RK4 integration of the master equation.

    Hermiticity is restored after every step; the trace is left untouched so
    trace drift stays a meaningful accuracy diagnostic.
    """
    if dt <= 0:
        raise StepTooLarge(f"dt must be positive, got {dt}")
    limit = stable_step(hamiltonian, channels)
    if dt > limit:
        raise StepTooLarge(f"dt={dt:.3e} exceeds stability bound {limit:.3e}")
    if t_final < 0:
        raise ValueError(f"t_final must be >= 0, got {t_final}")
    steps, remainder = divmod(t_final, dt)
    rho = np.array(rho0, dtype=complex)

    def rk4(rho, h):
        k1 = lindblad_rhs(rho, hamiltonian, channels)
        k2 = lindblad_rhs(rho + 0.5 * h * k1, hamiltonian, channels)
        k3 = lindblad_rhs(rho + 0.5 * h * k2, hamiltonian, channels)
        k4 = lindblad_rhs(rho + h * k3, hamiltonian, channels)
        out = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return 0.5 * (out + out.conj().T)

    for _ in range(int(steps)):
        rho = rk4(rho, dt)
    if remainder > 1e-15 * max(t_final, dt):
        rho = rk4(rho, remainder)
    return rho


def dissipative_fock_fidelity(seq: PulseSequence, channels: DecayChannels,
                              m: int) -> float:
    """<g,m| rho |g,m> after running the sequence with dissipators active."""
    d = dimension(seq.n_max)
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    for step in seq.steps:
        if step.duration == 0.0:
            continue
        h = rwa_hamiltonian(step.kind, seq.rates, seq.n_max)
        dt = stable_step(h, channels)
        if not math.isfinite(dt):
            dt = step.duration
        dt = min(dt, step.duration)
        rho = evolve_density(rho, h, channels, step.duration, dt)
    idx = flat_index(G, m, seq.n_max)
    return float(rho[idx, idx].real)
