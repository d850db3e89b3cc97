"""Pulse-sequence synthesis: map |g,0> to a requested cavity state.

Sequences follow the carrier/red-sideband alternation, with optional idle
steps inserted for phase control.  The back-solver runs the inverse
evolution level by level: a red pulse folds the top cavity amplitude into
the qubit, a carrier pulse merges the qubit back to ground.  Both pulses
have hardware-fixed rotation axes, so the idle-free construction covers
only targets whose relative phases sit on the lattice arg(c_n) = -n*theta
(mod pi).  With idle steps enabled, off-lattice targets are solved by a
least-squares refinement over an extended carrier/red/idle sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, least_squares

from .dynamics import (
    PulseKind,
    RabiRates,
    propagator,
    rwa_hamiltonian,
)
from .errors import (
    DimensionMismatch,
    InvalidTarget,
    PhaseUnreachable,
    TruncationTooSmall,
)
from .hilbert import (
    E,
    G,
    Ket,
    dimension,
    expm_hermitian,
    fidelity,
    flat_index,
    ket_from_cavity_coefficients,
    vacuum,
)

GUARD_LEVELS = 2        # truncation head-room above the largest target level
_AMP_TOL = 1e-11        # amplitude treated as zero in the back-solver
_PHASE_TOL = 1e-9       # realness tolerance for on-lattice phase checks
_SYNTH_FID = 1.0 - 1e-10


@dataclass(frozen=True)
class PulseStep:
    kind: PulseKind
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "kind", PulseKind(self.kind))
        if not (math.isfinite(self.duration) and self.duration >= 0.0):
            raise ValueError(f"duration must be finite and >= 0, got {self.duration}")


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pulse steps plus the rates and truncation they were built for."""

    steps: tuple[PulseStep, ...]
    rates: RabiRates
    n_max: int

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self):
        return len(self.steps)

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.steps))


@dataclass(frozen=True)
class TargetState:
    """Cavity target sum_n c_n |n> with c_0..c_N."""

    coefficients: tuple[complex, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if len(coeffs) == 0:
            raise InvalidTarget("target needs at least one coefficient")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coeffs):
            raise InvalidTarget("target coefficients must be finite")
        norm_sq = sum(abs(c) ** 2 for c in coeffs)
        if abs(norm_sq - 1.0) > 1e-10:
            raise InvalidTarget(
                f"target coefficients must be normalized (sum |c|^2 = {norm_sq!r})"
            )
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def top_level(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def from_unnormalized(cls, coefficients) -> "TargetState":
        arr = np.asarray(coefficients, dtype=complex)
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise InvalidTarget("target coefficients are all zero")
        return cls(tuple(arr / norm))


# ---------------------------------------------------------------------------
# simulation

def simulate_sequence(seq: PulseSequence, initial: Ket | None = None,
                      engine: str = "closed") -> Ket:
    """Apply the sequence's propagators to `initial` (default |g,0>).

    engine="closed" uses the analytic propagators; engine="expm" exponentiates
    the RWA Hamiltonians instead, serving as an independent cross-check.
    """
    if initial is None:
        initial = vacuum(seq.n_max)
    if initial.n_max != seq.n_max:
        raise DimensionMismatch(
            f"initial ket truncation {initial.n_max} != sequence truncation {seq.n_max}"
        )
    if engine not in ("closed", "expm"):
        raise ValueError(f"unknown engine {engine!r}")
    psi = initial.amplitudes.copy()
    for step in seq.steps:
        if engine == "closed":
            u = propagator(step.kind, step.duration, seq.rates, seq.n_max)
        else:
            h = rwa_hamiltonian(step.kind, seq.rates, seq.n_max)
            u = expm_hermitian(h, step.duration)
        psi = u @ psi
    return Ket(psi, seq.n_max)


def _prune(steps) -> tuple[PulseStep, ...]:
    return tuple(s for s in steps if s.duration > 0.0)


# ---------------------------------------------------------------------------
# fixed protocols

def fock_sequence(m: int, rates: RabiRates, n_max: int | None = None) -> PulseSequence:
    """Carrier/red ladder that climbs |g,0> -> |g,m>.

    Step pair l transfers level l-1 to level l: a pi/2 carrier flip followed
    by a red pulse of duration pi / (2 |O2| sqrt(l)).
    """
    if m < 0:
        raise InvalidTarget(f"Fock index must be >= 0, got {m}")
    if n_max is None:
        n_max = m + GUARD_LEVELS
    if n_max < m + GUARD_LEVELS:
        raise TruncationTooSmall(
            f"n_max={n_max} leaves no guard band above target level {m}"
        )
    steps = []
    for level in range(1, m + 1):
        steps.append(PulseStep(PulseKind.CARRIER, math.pi / (2 * rates.omega1)))
        steps.append(
            PulseStep(
                PulseKind.RED_SIDEBAND,
                math.pi / (2 * rates.omega2_mag * math.sqrt(level)),
            )
        )
    return PulseSequence(_prune(steps), rates, n_max)


def binary_superposition(alpha1: complex, alpha2: complex, rates: RabiRates,
                         n_max: int | None = None) -> PulseSequence:
    """Two-step sequence for alpha1 |0> + alpha2 |1>.

    The protocol realizes alpha1 = cos(O1 t1'), alpha2 = e^{-i theta} sin(O1 t1')
    with a final quarter-period red pulse, so after factoring a global phase the
    target must satisfy arg(alpha2 / alpha1) = -theta (mod pi).
    """
    alpha1, alpha2 = complex(alpha1), complex(alpha2)
    norm_sq = abs(alpha1) ** 2 + abs(alpha2) ** 2
    if abs(norm_sq - 1.0) > 1e-10:
        raise InvalidTarget(f"|a1|^2 + |a2|^2 = {norm_sq!r}, expected 1")
    if n_max is None:
        n_max = 1 + GUARD_LEVELS
    if n_max < 1 + GUARD_LEVELS:
        raise TruncationTooSmall(f"n_max={n_max} leaves no guard band above level 1")
    if abs(alpha2) <= _AMP_TOL:
        return PulseSequence((), rates, n_max)
    red = PulseStep(PulseKind.RED_SIDEBAND, math.pi / (2 * rates.omega2_mag))
    if abs(alpha1) <= _AMP_TOL:
        carrier = PulseStep(PulseKind.CARRIER, math.pi / (2 * rates.omega1))
        return PulseSequence((carrier, red), rates, n_max)
    ratio = alpha2 * np.exp(1j * rates.theta) / alpha1
    if abs(ratio.imag) > _PHASE_TOL * (1.0 + abs(ratio)):
        raise PhaseUnreachable(1)
    angle = math.atan2(ratio.real, 1.0) % math.pi
    steps = (PulseStep(PulseKind.CARRIER, angle / rates.omega1), red)
    return PulseSequence(_prune(steps), rates, n_max)


# ---------------------------------------------------------------------------
# back-evolution solver

def _apply(kind: PulseKind, duration: float, rates: RabiRates, n_max: int,
           psi: np.ndarray, inverse: bool) -> np.ndarray:
    u = propagator(kind, duration, rates, n_max)
    if inverse:
        u = u.conj().T
    return u @ psi


def _carrier_merge_ok(psi: np.ndarray, level: int, n_max: int) -> bool:
    """Check the carrier can fold |e,level-1> fully into |g,level-1>."""
    amp_e = psi[flat_index(E, level - 1, n_max)]
    amp_g = psi[flat_index(G, level - 1, n_max)]
    if abs(amp_e) <= _AMP_TOL or abs(amp_g) <= _AMP_TOL:
        return True
    ratio = -1j * amp_e / amp_g
    return abs(ratio.imag) <= _PHASE_TOL * (1.0 + abs(ratio))


def _merge_defect(psi: np.ndarray, level: int, n_max: int) -> float:
    """Signed defect Re(E conj(G)); zero iff the carrier merge axis fits."""
    amp_e = psi[flat_index(E, level - 1, n_max)]
    amp_g = psi[flat_index(G, level - 1, n_max)]
    return float((amp_e * np.conj(amp_g)).real)


def _idle_for_merge(psi: np.ndarray, level: int, rates: RabiRates,
                    n_max: int, red_duration: float) -> float | None:
    """Idle angle making the carrier merge possible after a forced red pulse.

    Only called when |e,level-1> is empty, so the red duration is pinned and
    the idle angle is free; the defect is a smooth periodic function of the
    angle with zero mean, so a bracketing root always exists.
    """

    def defect(u):
        trial = _apply(PulseKind.IDLE, u / rates.omega_cavity, rates, n_max,
                       psi, inverse=True)
        after = _apply(PulseKind.RED_SIDEBAND, red_duration, rates, n_max,
                       trial, inverse=True)
        return _merge_defect(after, level, n_max)

    grid = np.linspace(0.0, 2 * math.pi, 241)
    vals = [defect(u) for u in grid]
    for i, v in enumerate(vals):
        if abs(v) < 1e-18:
            return float(grid[i])
    for i in range(len(grid) - 1):
        if vals[i] * vals[i + 1] < 0:
            root = brentq(defect, grid[i], grid[i + 1], xtol=1e-15)
            trial = _apply(PulseKind.IDLE, root / rates.omega_cavity, rates,
                           n_max, psi, inverse=True)
            after = _apply(PulseKind.RED_SIDEBAND, red_duration, rates, n_max,
                           trial, inverse=True)
            if _carrier_merge_ok(after, level, n_max):
                return float(root)
    return None


def _backsolve(coefficients, rates: RabiRates, n_max: int, allow_idle: bool):
    """Inverse evolution of the target down to |g,0>.

    Returns (forward_steps, failed_level); exactly one of the two is None.
    """
    top = len(coefficients) - 1
    psi = ket_from_cavity_coefficients(coefficients, n_max).amplitudes.copy()
    backward: list[PulseStep] = []

    def push(kind: PulseKind, duration: float):
        nonlocal psi
        if duration <= 0.0:
            return
        psi = _apply(kind, duration, rates, n_max, psi, inverse=True)
        backward.append(PulseStep(kind, duration))

    for level in range(top, 0, -1):
        amp_top = psi[flat_index(G, level, n_max)]
        amp_e = psi[flat_index(E, level - 1, n_max)]
        if abs(amp_top) > _AMP_TOL:
            sqrt_l = math.sqrt(level)
            if abs(amp_e) <= _AMP_TOL:
                # red angle pinned to a quarter turn; idle is free for the merge
                duration = math.pi / (2 * rates.omega2_mag * sqrt_l)
                if allow_idle:
                    after = _apply(PulseKind.RED_SIDEBAND, duration, rates,
                                   n_max, psi, inverse=True)
                    if not _carrier_merge_ok(after, level, n_max):
                        angle = _idle_for_merge(psi, level, rates, n_max, duration)
                        if angle is None:
                            return None, level
                        push(PulseKind.IDLE, angle / rates.omega_cavity)
                push(PulseKind.RED_SIDEBAND, duration)
            else:
                ratio = 1j * np.exp(1j * rates.theta) * amp_top / amp_e
                if abs(ratio.imag) > _PHASE_TOL * (1.0 + abs(ratio)):
                    if not allow_idle:
                        return None, level
                    shift = (-np.angle(ratio)) % math.pi
                    placed = False
                    for candidate in (shift, shift + math.pi):
                        trial = _apply(PulseKind.IDLE,
                                       candidate / rates.omega_cavity,
                                       rates, n_max, psi, inverse=True)
                        r = (1j * np.exp(1j * rates.theta)
                             * trial[flat_index(G, level, n_max)]
                             / trial[flat_index(E, level - 1, n_max)])
                        angle = math.atan2(r.real, 1.0) % math.pi
                        duration = angle / (rates.omega2_mag * sqrt_l)
                        after = _apply(PulseKind.RED_SIDEBAND, duration, rates,
                                       n_max, trial, inverse=True)
                        if _carrier_merge_ok(after, level, n_max):
                            push(PulseKind.IDLE, candidate / rates.omega_cavity)
                            push(PulseKind.RED_SIDEBAND, duration)
                            placed = True
                            break
                    if not placed:
                        return None, level
                else:
                    angle = math.atan2(ratio.real, 1.0) % math.pi
                    push(PulseKind.RED_SIDEBAND,
                         angle / (rates.omega2_mag * sqrt_l))
        # carrier merge of |e,level-1> into |g,level-1>
        amp_e = psi[flat_index(E, level - 1, n_max)]
        amp_g = psi[flat_index(G, level - 1, n_max)]
        if abs(amp_e) > _AMP_TOL:
            if abs(amp_g) <= _AMP_TOL:
                angle = math.pi / 2
            else:
                ratio = -1j * amp_e / amp_g
                if abs(ratio.imag) > _PHASE_TOL * (1.0 + abs(ratio)):
                    return None, level
                angle = math.atan2(ratio.real, 1.0) % math.pi
            push(PulseKind.CARRIER, angle / rates.omega1)

    return tuple(reversed(backward)), None


# ---------------------------------------------------------------------------
# least-squares completion for off-lattice targets

_TRIPLES_PER_LEVEL = 3
_MAX_STARTS = 24
_REFINE_INFID = 1e-11


def _angle_propagators(params: np.ndarray, rates: RabiRates, n_max: int):
    """Propagators and angle-derivatives for the [carrier, red, idle] chain."""
    d = dimension(n_max)
    mats, dmats = [], []
    eith = np.exp(1j * rates.theta)
    n_triples = len(params) // 3
    for block in range(n_triples):
        x, phi, u = params[3 * block: 3 * block + 3]
        uc = np.zeros((d, d), dtype=complex)
        duc = np.zeros((d, d), dtype=complex)
        c, s = math.cos(x), math.sin(x)
        for n in range(n_max + 1):
            g, e = flat_index(G, n, n_max), flat_index(E, n, n_max)
            uc[g, g] = uc[e, e] = c
            uc[g, e] = uc[e, g] = 1j * s
            duc[g, g] = duc[e, e] = -s
            duc[g, e] = duc[e, g] = 1j * c
        ur = np.zeros((d, d), dtype=complex)
        dur = np.zeros((d, d), dtype=complex)
        ur[flat_index(G, 0, n_max), flat_index(G, 0, n_max)] = 1.0
        ur[flat_index(E, n_max, n_max), flat_index(E, n_max, n_max)] = 1.0
        for n in range(n_max):
            e1, g1 = flat_index(E, n, n_max), flat_index(G, n + 1, n_max)
            root = math.sqrt(n + 1)
            c, s = math.cos(phi * root), math.sin(phi * root)
            ur[e1, e1] = ur[g1, g1] = c
            ur[e1, g1] = -1j * eith * s
            ur[g1, e1] = -1j * np.conj(eith) * s
            dur[e1, e1] = dur[g1, g1] = -s * root
            dur[e1, g1] = -1j * eith * c * root
            dur[g1, e1] = -1j * np.conj(eith) * c * root
        photon = np.arange(d) // 2
        ui = np.diag(np.exp(-1j * photon * u))
        dui = np.diag(-1j * photon * np.exp(-1j * photon * u))
        mats += [uc, ur, ui]
        dmats += [duc, dur, dui]
    return mats, dmats


def _chain_state_and_jacobian(params, rates, n_max):
    mats, dmats = _angle_propagators(params, rates, n_max)
    d = dimension(n_max)
    start = np.zeros(d, dtype=complex)
    start[0] = 1.0
    prefix = [start]
    for m in mats:
        prefix.append(m @ prefix[-1])
    suffix = [np.eye(d, dtype=complex)]
    for m in reversed(mats):
        suffix.append(suffix[-1] @ m)
    suffix = suffix[::-1]
    psi = prefix[-1]
    jac = np.empty((d, len(mats)), dtype=complex)
    for j, dm in enumerate(dmats):
        jac[:, j] = suffix[j + 1] @ (dm @ prefix[j])
    return psi, jac


def _refine(target_vec: np.ndarray, rates: RabiRates, n_max: int, top: int,
            fid_goal: float):
    """Solve the full carrier/red/idle chain by bounded least squares.

    The chain is overparametrized (three triples per cavity level), which in
    practice removes the stalls that the minimal parametrization hits at
    configurations where amplitudes vanish.
    """
    n_triples = _TRIPLES_PER_LEVEL * top + 1
    n_params = 3 * n_triples

    def residual(q):
        psi, _ = _chain_state_and_jacobian(q[:n_params], rates, n_max)
        r = psi * np.exp(-1j * q[n_params]) - target_vec
        return np.concatenate([r.real, r.imag])

    def jacobian(q):
        psi, jac = _chain_state_and_jacobian(q[:n_params], rates, n_max)
        phase = np.exp(-1j * q[n_params])
        cols = np.concatenate([jac * phase, (-1j * psi * phase)[:, None]], axis=1)
        return np.concatenate([cols.real, cols.imag])

    lo = np.concatenate([np.tile([-math.pi, 0.0, 0.0], n_triples), [-6 * math.pi]])
    hi = np.concatenate(
        [np.tile([2 * math.pi, 2 * math.pi, 4 * math.pi], n_triples), [6 * math.pi]]
    )
    rng = np.random.default_rng(1804289383)
    best_fid, best_params = -1.0, None
    for _ in range(_MAX_STARTS):
        p0 = np.empty(n_params)
        for block in range(n_triples):
            p0[3 * block] = rng.uniform(0.15, math.pi - 0.15)
            p0[3 * block + 1] = rng.uniform(0.15, math.pi - 0.15)
            p0[3 * block + 2] = rng.uniform(math.pi + 0.3, 3 * math.pi - 0.3)
        psi0, _ = _chain_state_and_jacobian(p0, rates, n_max)
        overlap = np.vdot(target_vec, psi0)
        beta0 = float(np.angle(overlap)) if abs(overlap) > 1e-12 else 0.0
        sol = least_squares(
            residual, np.concatenate([p0, [beta0]]), jac=jacobian,
            bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400,
        )
        psi, _ = _chain_state_and_jacobian(sol.x[:n_params], rates, n_max)
        fid = float(abs(np.vdot(target_vec, psi)) ** 2)
        if fid > best_fid:
            best_fid, best_params = fid, sol.x[:n_params]
        if best_fid >= fid_goal:
            break
    return best_fid, best_params


def _steps_from_angles(params: np.ndarray, rates: RabiRates) -> tuple[PulseStep, ...]:
    """Angles -> pulse steps, reduced to canonical durations.

    Carrier angles wrap mod pi (a pi shift only flips the global sign) and
    idle angles wrap mod 2 pi; red durations are not period-reducible and are
    kept as found.
    """
    steps = []
    n_triples = len(params) // 3
    for block in range(n_triples):
        x = params[3 * block] % math.pi
        phi = params[3 * block + 1]
        u = params[3 * block + 2] % (2 * math.pi)
        if x > 1e-9:
            steps.append(PulseStep(PulseKind.CARRIER, x / rates.omega1))
        if phi > 1e-9:
            steps.append(PulseStep(PulseKind.RED_SIDEBAND, phi / rates.omega2_mag))
        if u > 1e-9 and (2 * math.pi - u) > 1e-9:
            steps.append(PulseStep(PulseKind.IDLE, u / rates.omega_cavity))
    return tuple(steps)


# ---------------------------------------------------------------------------
# public synthesis entry points

def synthesize(target: TargetState, rates: RabiRates, allow_idle: bool = False,
               n_max: int | None = None) -> PulseSequence:
    """Compile a pulse sequence preparing the target cavity state from |g,0>.

    Without idle steps only phase-lattice targets are reachable; the first
    offending level is reported otherwise.  With allow_idle the solver falls
    back to a least-squares completion when the direct construction fails.
    """
    top = target.top_level
    if n_max is None:
        n_max = max(top + GUARD_LEVELS, 1 + GUARD_LEVELS)
    if n_max < top + GUARD_LEVELS:
        raise TruncationTooSmall(
            f"n_max={n_max} leaves no guard band above target level {top}"
        )
    if top == 0:
        return PulseSequence((), rates, n_max)

    target_ket = ket_from_cavity_coefficients(target.coefficients, n_max)

    steps, failed_level = _backsolve(target.coefficients, rates, n_max,
                                     allow_idle=False)
    if steps is not None:
        seq = PulseSequence(_prune(steps), rates, n_max)
        if fidelity(simulate_sequence(seq), target_ket) >= _SYNTH_FID:
            return seq
        failed_level = top
    if not allow_idle:
        raise PhaseUnreachable(failed_level)

    steps, _ = _backsolve(target.coefficients, rates, n_max, allow_idle=True)
    if steps is not None:
        seq = PulseSequence(_prune(steps), rates, n_max)
        if fidelity(simulate_sequence(seq), target_ket) >= _SYNTH_FID:
            return seq

    fid, params = _refine(target_ket.amplitudes, rates, n_max, top,
                          fid_goal=1.0 - _REFINE_INFID)
    seq = PulseSequence(_steps_from_angles(params, rates), rates, n_max)
    achieved = fidelity(simulate_sequence(seq), target_ket)
    if achieved < _SYNTH_FID:
        raise RuntimeError(
            f"synthesis did not converge (best fidelity {achieved:.3e})"
        )
    return seq


def reachable(target: TargetState, theta: float) -> tuple[bool, int | None]:
    """Dry-run the idle-free back-solver; certificate is the stuck level."""
    rates = RabiRates(omega1=1.0, omega2_mag=1.0, omega_cavity=1.0, theta=theta)
    top = target.top_level
    if top == 0:
        return True, None
    n_max = top + GUARD_LEVELS
    steps, failed_level = _backsolve(target.coefficients, rates, n_max,
                                     allow_idle=False)
    if steps is None:
        return False, failed_level
    seq = PulseSequence(_prune(steps), rates, n_max)
    target_ket = ket_from_cavity_coefficients(target.coefficients, n_max)
    if fidelity(simulate_sequence(seq), target_ket) >= _SYNTH_FID:
        return True, None
    return False, top


# ---------------------------------------------------------------------------
# serialization (the sequence-file interface)

def sequence_to_document(seq: PulseSequence) -> dict:
    """JSON-shaped document with the exact published field names."""
    return {
        "rates": {
            "omega1": seq.rates.omega1,
            "omega2_mag": seq.rates.omega2_mag,
            "theta": seq.rates.theta,
            "omega_cavity": seq.rates.omega_cavity,
        },
        "n_max": seq.n_max,
        "steps": [
            {"kind": step.kind.value, "duration_s": float(step.duration)}
            for step in seq.steps
        ],
    }


def sequence_from_document(doc: dict) -> PulseSequence:
    try:
        rates = RabiRates(
            omega1=float(doc["rates"]["omega1"]),
            omega2_mag=float(doc["rates"]["omega2_mag"]),
            theta=float(doc["rates"]["theta"]),
            omega_cavity=float(doc["rates"]["omega_cavity"]),
        )
        n_max = int(doc["n_max"])
        steps = tuple(
            PulseStep(PulseKind(s["kind"]), float(s["duration_s"]))
            for s in doc["steps"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed sequence document: {exc}") from exc
    return PulseSequence(steps, rates, n_max)


def sequence_to_json(seq: PulseSequence) -> str:
    return json.dumps(sequence_to_document(seq), indent=2)


def sequence_from_json(text: str) -> PulseSequence:
    return sequence_from_document(json.loads(text))
