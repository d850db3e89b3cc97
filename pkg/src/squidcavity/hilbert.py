"""Truncated qubit (x) Fock Hilbert space with dense operators.

Basis ordering is photon-major, qubit-minor: flat index = 2n + q with
q = 0 for |g> and q = 1 for |e>.  With this ordering the sideband rungs
{|e,n>, |g,n+1>} sit in adjacent 2x2 blocks, which keeps the closed-form
propagators easy to assemble exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar as HBAR

from .errors import DimensionMismatch, HermiticityViolation, IndexOutOfRange

G = 0  # qubit ground
E = 1  # qubit excited

QUBIT_LABELS = ("g", "e")


def dimension(n_max: int) -> int:
    """Dimension of the truncated space, 2*(n_max+1)."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return 2 * (n_max + 1)


def flat_index(qubit: int, photons: int, n_max: int) -> int:
    """Flat index of basis state |qubit, photons> (bijective with its inverse)."""
    if qubit not in (G, E):
        raise IndexOutOfRange(f"qubit must be 0 (g) or 1 (e), got {qubit}")
    if photons < 0 or photons > n_max:
        raise IndexOutOfRange(
            f"photon number {photons} outside truncation 0..{n_max}"
        )
    return 2 * photons + qubit


def basis_state(index: int, n_max: int) -> tuple[int, int]:
    """Inverse of flat_index: index -> (qubit, photons)."""
    if index < 0 or index >= dimension(n_max):
        raise IndexOutOfRange(f"index {index} outside 0..{dimension(n_max) - 1}")
    return index % 2, index // 2


@dataclass(frozen=True)
class Ket:
    """Normalized state vector over the qubit (x) Fock basis."""

    amplitudes: np.ndarray
    n_max: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (dimension(self.n_max),):
            raise DimensionMismatch(
                f"amplitude vector of length {amps.shape} does not match "
                f"n_max={self.n_max} (expected {dimension(self.n_max)})"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Ket":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.amplitudes / n, self.n_max)

    def amplitude(self, qubit: int, photons: int) -> complex:
        return complex(self.amplitudes[flat_index(qubit, photons, self.n_max)])

    def population(self, qubit: int, photons: int) -> float:
        return abs(self.amplitude(qubit, photons)) ** 2


def basis_ket(qubit: int, photons: int, n_max: int) -> Ket:
    """Computational basis state |qubit, photons>."""
    v = np.zeros(dimension(n_max), dtype=complex)
    v[flat_index(qubit, photons, n_max)] = 1.0
    return Ket(v, n_max)


def vacuum(n_max: int) -> Ket:
    """|g, 0>, the protocol's initial state."""
    return basis_ket(G, 0, n_max)


def ket_from_cavity_coefficients(coefficients, n_max: int) -> Ket:
    """State sum_n c_n |g, n> from cavity coefficients c_0..c_N."""
    coefficients = np.asarray(coefficients, dtype=complex)
    if len(coefficients) - 1 > n_max:
        raise IndexOutOfRange(
            f"{len(coefficients)} coefficients exceed truncation n_max={n_max}"
        )
    v = np.zeros(dimension(n_max), dtype=complex)
    for n, c in enumerate(coefficients):
        v[flat_index(G, n, n_max)] = c
    return Ket(v, n_max).normalized()


def ladder_operators(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation operators, identity on the qubit factor.

    a |q, n> = sqrt(n) |q, n-1>; top photon row truncated.
    """
    d = dimension(n_max)
    a = np.zeros((d, d), dtype=complex)
    for n in range(1, n_max + 1):
        for q in (G, E):
            a[flat_index(q, n - 1, n_max), flat_index(q, n, n_max)] = np.sqrt(n)
    return a, a.conj().T


def number_operator(n_max: int) -> np.ndarray:
    """Photon number operator a†a (identity on the qubit factor)."""
    d = dimension(n_max)
    return np.diag(np.arange(d) // 2).astype(complex)


def qubit_sigma_minus(n_max: int) -> np.ndarray:
    """Lowering operator |g><e| on the qubit, identity on the photon factor."""
    d = dimension(n_max)
    s = np.zeros((d, d), dtype=complex)
    for n in range(n_max + 1):
        s[flat_index(G, n, n_max), flat_index(E, n, n_max)] = 1.0
    return s


def qubit_sigma_plus(n_max: int) -> np.ndarray:
    return qubit_sigma_minus(n_max).conj().T


def qubit_sigma_z(n_max: int) -> np.ndarray:
    """sigma_z with |e> as the +1 eigenstate."""
    d = dimension(n_max)
    diag = np.array([1.0 if i % 2 == E else -1.0 for i in range(d)])
    return np.diag(diag).astype(complex)


def is_hermitian(matrix: np.ndarray, tol: float = 1e-12) -> bool:
    """Hermiticity to relative tolerance (scale set by the matrix norm)."""
    scale = max(1.0, float(np.abs(matrix).max()))
    return bool(np.abs(matrix - matrix.conj().T).max() <= tol * scale)


def is_unitary(matrix: np.ndarray, tol: float = 1e-12) -> bool:
    d = matrix.shape[0]
    return bool(np.abs(matrix.conj().T @ matrix - np.eye(d)).max() <= tol)


def expm_hermitian(hamiltonian: np.ndarray, t: float, hbar: float = HBAR) -> np.ndarray:
    """exp(-i H t / hbar) by eigendecomposition of the Hermitian H.

    Dimensions here stay small, so eigendecomposition gives machine-precision
    unitarity with no series truncation to tune.
    """
    hamiltonian = np.asarray(hamiltonian, dtype=complex)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if not is_hermitian(hamiltonian):
        raise HermiticityViolation(
            "expm_hermitian requires a Hermitian matrix"
        )
    w, v = np.linalg.eigh(hamiltonian)
    phases = np.exp(-1j * w * t / hbar)
    return (v * phases) @ v.conj().T


def fidelity(x: Ket, y: Ket) -> float:
    """|<x|y>|^2, symmetric and global-phase invariant."""
    if x.n_max != y.n_max:
        raise DimensionMismatch(
            f"kets live on different truncations ({x.n_max} vs {y.n_max})"
        )
    f = abs(np.vdot(x.amplitudes, y.amplitudes)) ** 2
    return float(min(f, 1.0))
