"""Device physics: couplings, timescales, thermal occupancy, feasibility.

All quantities are SI internally.  The cavity is a full-wave standing-wave
mode with the SQUID loop at an antinode; the loop is small compared to the
wavelength, so the mode function is uniform over the loop area.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import (
    Boltzmann as K_B,
    c as C_LIGHT,
    epsilon_0 as EPS0,
    h as H_PLANCK,
    hbar as HBAR,
    physical_constants,
)

from .dynamics import PulseKind, RabiRates
from .errors import NotAPhysicalKnob

PHI0 = physical_constants["mag. flux quantum"][0]  # h / 2e
E_CHARGE = physical_constants["elementary charge"][0]

DEFAULT_MARGIN = 10.0  # operational reading of "much greater than"


@dataclass(frozen=True)
class DeviceParams:
    """SQUID charge-qubit parameters.

    EJ is the single-junction Josephson energy in joules; the lab convention
    quotes 2 E_J / h in GHz.  S is the loop area, mu the relative permeability
    of a filler that boosts the flux coupling.
    """

    EJ: float
    Cg: float
    CJ: float
    S: float
    T1: float
    T2: float
    ng: float = 0.5
    phi_c: float = 0.0  # units of Phi_0
    mu: float = 1.0

    def __post_init__(self):
        for name in ("EJ", "Cg", "CJ", "S", "T1", "T2"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if not 0.0 <= self.ng <= 1.5:
            raise ValueError(f"ng must lie in [0, 1.5], got {self.ng}")
        if self.mu < 1.0:
            raise ValueError(f"mu must be >= 1, got {self.mu}")

    @classmethod
    def from_lab_units(cls, two_EJ_over_h_GHz: float, Cg_fF: float, CJ_fF: float,
                       S_um2: float, T1_us: float, T2_ns: float,
                       ng: float = 0.5, phi_c: float = 0.0,
                       mu: float = 1.0) -> "DeviceParams":
        return cls(
            EJ=two_EJ_over_h_GHz * 1e9 * H_PLANCK / 2.0,
            Cg=Cg_fF * 1e-15,
            CJ=CJ_fF * 1e-15,
            S=S_um2 * 1e-12,
            T1=T1_us * 1e-6,
            T2=T2_ns * 1e-9,
            ng=ng,
            phi_c=phi_c,
            mu=mu,
        )


@dataclass(frozen=True)
class CavityParams:
    """Microwave cavity: wavelength sets the frequency, V defaults to lambda^3."""

    wavelength: float
    Q: float
    T: float
    V: float | None = None
    theta: float = 0.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not self.Q > 0:
            raise ValueError(f"Q must be positive, got {self.Q}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.V is None:
            object.__setattr__(self, "V", self.wavelength ** 3)
        elif not self.V > 0:
            raise ValueError(f"V must be positive, got {self.V}")

    @property
    def omega(self) -> float:
        return 2 * math.pi * C_LIGHT / self.wavelength

    @property
    def frequency(self) -> float:
        return C_LIGHT / self.wavelength


@dataclass(frozen=True)
class DerivedParams:
    E_ch: float
    omega: float
    E_z: float
    eta_mag: float
    beta_mag: float
    xi: float
    rates: RabiRates
    resonance_mismatch: bool


def eta_magnitude(S: float, cav: CavityParams) -> float:
    """Flux amplitude |eta| = (S/c) sqrt(hbar w / eps0 V) of the cavity mode."""
    if S < 0:
        raise ValueError(f"loop area must be >= 0, got {S}")
    return (S / C_LIGHT) * math.sqrt(HBAR * cav.omega / (EPS0 * cav.V))


def derive(dev: DeviceParams, cav: CavityParams) -> DerivedParams:
    """Fill in couplings and Rabi rates from raw device/cavity parameters.

    The cavity frequency comes from the geometry (2 pi c / lambda); the
    charge-qubit resonance 4 E_ch / hbar is reported as a consistency flag
    rather than enforced, since E_ch and lambda are independent inputs.
    """
    E_ch = E_CHARGE ** 2 / (2 * (dev.Cg + 2 * dev.CJ))
    omega = cav.omega
    E_z = -2 * E_ch * (1 - 2 * dev.ng)
    eta = eta_magnitude(dev.S, cav)
    beta = (math.pi * eta * dev.EJ / PHI0) * dev.mu * math.sin(math.pi * dev.phi_c)
    xi = dev.EJ * math.cos(math.pi * dev.phi_c)
    omega1 = dev.EJ / HBAR
    omega2 = math.pi * eta * dev.EJ * dev.mu / (HBAR * PHI0)
    mismatch = abs(4 * E_ch / HBAR - omega) / omega > 0.05
    rates = RabiRates(omega1=omega1, omega2_mag=omega2, omega_cavity=omega,
                      theta=cav.theta)
    return DerivedParams(E_ch=E_ch, omega=omega, E_z=E_z, eta_mag=eta,
                         beta_mag=abs(beta), xi=xi, rates=rates,
                         resonance_mismatch=bool(mismatch))


def thermal_occupation(wavelength: float, T: float) -> float:
    """Bose-Einstein mean photon number at the cavity frequency."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if T < 0:
        raise ValueError(f"temperature must be >= 0, got {T}")
    if T == 0.0:
        return 0.0
    x = HBAR * (2 * math.pi * C_LIGHT / wavelength) / (K_B * T)
    # expm1 keeps precision at low frequency; at large x fall back to e^-x
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def log10_thermal_occupation(wavelength: float, T: float) -> float:
    """log10 of the occupancy; usable where the number itself underflows."""
    if T <= 0:
        return -math.inf
    x = HBAR * (2 * math.pi * C_LIGHT / wavelength) / (K_B * T)
    if x > 50.0:
        return -x / math.log(10.0)
    return math.log10(thermal_occupation(wavelength, T))


def photon_lifetime(Q: float, wavelength: float) -> float:
    """tau_p = Q / f = Q lambda / c."""
    if Q <= 0 or wavelength <= 0:
        raise ValueError("Q and wavelength must be positive")
    return Q * wavelength / C_LIGHT


def operation_times(derived: DerivedParams, n_max: int) -> tuple[float, np.ndarray]:
    """Qubit flip time tau_e and photon transfer times tau_c^(n), n = 0..n_max."""
    tau_e = math.pi / (2 * derived.rates.omega1)
    n = np.arange(n_max + 1)
    tau_c = math.pi / (2 * derived.rates.omega2_mag * np.sqrt(n + 1.0))
    return tau_e, tau_c


def fock_ratio_curve(derived: DerivedParams, cav: CavityParams,
                     n_range) -> list[tuple[int, float]]:
    """Lifetime-to-operation ratio (tau_p / n) / tau_c^(n) for each n >= 1."""
    tau_p = photon_lifetime(cav.Q, cav.wavelength)
    out = []
    for n in n_range:
        if n < 1:
            raise ValueError(f"ratio curve is defined for n >= 1, got {n}")
        ratio = 2 * derived.rates.omega2_mag * tau_p * math.sqrt(n + 1.0) / (n * math.pi)
        out.append((int(n), float(ratio)))
    return out


def knob_settings(kind: PulseKind) -> tuple[float, float]:
    """Gate charge and flux (in Phi_0 units) selecting each pulse process."""
    kind = PulseKind(kind)
    if kind is PulseKind.CARRIER:
        return 0.5, 0.0
    if kind is PulseKind.RED_SIDEBAND:
        return 1.0, 0.5
    if kind is PulseKind.BLUE_SIDEBAND:
        return 0.0, 0.5
    raise NotAPhysicalKnob(
        "idle steps only need the coupling off (any flux with sin(pi phi_c) = 0)"
    )


@dataclass(frozen=True)
class FeasibilityReport:
    tau_e: float
    tau_c: tuple[float, ...]
    tau_p: float
    n_th: float
    single_photon_ok: bool
    fock_ok: bool
    superposition_ok: bool
    max_fock: int
    margin: float = DEFAULT_MARGIN
    target_n: int = 1


def feasibility_report(dev: DeviceParams, cav: CavityParams, target_n: int,
                       margin: float = DEFAULT_MARGIN) -> FeasibilityReport:
    """Timescale verdicts for preparing Fock states up to target_n.

    single_photon_ok is the bare ordering tau_c^(0) < T1 (the qubit emits
    before it relaxes); fock_ok and superposition_ok apply the stricter
    margin to min(T1, tau_p) / max(tau_e, tau_c^(n)), with T2 joining the
    numerator set for superpositions.
    """
    if target_n < 0:
        raise ValueError(f"target_n must be >= 0, got {target_n}")
    derived = derive(dev, cav)
    tau_e, tau_c = operation_times(derived, max(target_n, 1))
    tau_p = photon_lifetime(cav.Q, cav.wavelength)
    n_th = thermal_occupation(cav.wavelength, cav.T)

    single_photon_ok = tau_c[0] < dev.T1

    def timescales_pass(numerator: float) -> bool:
        slowest_op = max(tau_e, float(tau_c[0]))  # tau_c decreases with n
        return numerator / slowest_op >= margin

    fock_ok = timescales_pass(min(dev.T1, tau_p))
    superposition_ok = timescales_pass(min(dev.T1, dev.T2, tau_p))

    max_fock = 0
    if fock_ok:
        # ratio(n) >= 1  <=>  n^2 - B n - B <= 0,  B = (2 |O2| tau_p / pi)^2
        b = (2 * derived.rates.omega2_mag * tau_p / math.pi) ** 2
        bound = int(math.floor((b + math.sqrt(b * b + 4 * b)) / 2))
        while bound >= 1 and fock_ratio_curve(derived, cav, [bound])[0][1] < 1.0:
            bound -= 1
        max_fock = max(bound, 0)

    return FeasibilityReport(
        tau_e=tau_e,
        tau_c=tuple(float(t) for t in tau_c[: target_n + 1]),
        tau_p=tau_p,
        n_th=n_th,
        single_photon_ok=single_photon_ok,
        fock_ok=fock_ok,
        superposition_ok=superposition_ok,
        max_fock=max_fock,
        margin=margin,
        target_n=target_n,
    )


# ---------------------------------------------------------------------------
# emitters

def ratio_curve_csv(curve) -> str:
    """CSV with header `n,ratio`, one row per photon number."""
    buf = io.StringIO()
    buf.write("n,ratio\n")
    for n, ratio in curve:
        buf.write(f"{n},{ratio:.12g}\n")
    return buf.getvalue()


def report_document(report: FeasibilityReport, dev: DeviceParams,
                    cav: CavityParams) -> dict:
    """Report fields plus the inputs echoed, ready for JSON emission."""
    return {
        "inputs": {
            "device": {
                "EJ_J": dev.EJ,
                "Cg_F": dev.Cg,
                "CJ_F": dev.CJ,
                "S_m2": dev.S,
                "T1_s": dev.T1,
                "T2_s": dev.T2,
                "ng": dev.ng,
                "phi_c_Phi0": dev.phi_c,
                "mu": dev.mu,
            },
            "cavity": {
                "wavelength_m": cav.wavelength,
                "Q": cav.Q,
                "T_K": cav.T,
                "V_m3": cav.V,
                "theta_rad": cav.theta,
            },
            "target_n": report.target_n,
            "margin": report.margin,
        },
        "tau_e_s": report.tau_e,
        "tau_c_s": list(report.tau_c),
        "tau_p_s": report.tau_p,
        "n_th": report.n_th,
        "single_photon_ok": report.single_photon_ok,
        "fock_ok": report.fock_ok,
        "superposition_ok": report.superposition_ok,
        "max_fock": report.max_fock,
    }


def report_to_json(report: FeasibilityReport, dev: DeviceParams,
                   cav: CavityParams) -> str:
    return json.dumps(report_document(report, dev, cav), indent=2)
