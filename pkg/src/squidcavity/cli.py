"""Command-line front end.

Commands: compile, simulate, feasibility, fig2, sweep.  Configuration is a
flat key=value file with dotted keys in lab units (GHz for 2E_J/h, cm for
wavelength, mK for temperature, um^2 for loop area); everything internal is
SI.  Exit codes: 0 success, 2 parse error, 3 physics-domain error, 4 target
unreachable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .compiler import (
    TargetState,
    binary_superposition,
    fock_sequence,
    sequence_from_json,
    sequence_to_json,
    simulate_sequence,
    synthesize,
)
from .errors import PhaseUnreachable, SquidCavityError
from .hilbert import QUBIT_LABELS, basis_state, fidelity, ket_from_cavity_coefficients
from .lindblad import DecayChannels, dissipative_fock_fidelity, evolve_density, stable_step
from .physics import (
    CavityParams,
    DeviceParams,
    derive,
    feasibility_report,
    fock_ratio_curve,
    photon_lifetime,
    ratio_curve_csv,
    report_to_json,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_UNREACHABLE = 4

DEFAULT_CONFIG = {
    "device.EJ_GHz": 13.0,       # 2 E_J / h
    "device.Cg_fF": 0.0584,
    "device.CJ_fF": 0.1,
    "device.ng": 0.5,
    "device.phi_c": 0.0,
    "device.S_um2": 100.0,       # 10 um x 10 um loop
    "device.T1_us": 1.3,
    "device.T2_ns": 5.0,
    "device.mu": 1.0,
    "cavity.lambda_cm": 0.1,
    "cavity.Q": 3e8,
    "cavity.T_mK": 30.0,
    "cavity.V_lambda3": 1.0,
    "cavity.theta": 0.0,
    "sim.n_max": 8,
    "report.margin": 10.0,
}


class CliParseError(ValueError):
    pass


def load_config(path: str | None, overrides=()) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise CliParseError(f"cannot read config file: {exc}") from exc
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliParseError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in cfg:
                raise CliParseError(f"{path}:{lineno}: unknown key {key!r}")
            cfg[key] = _parse_number(value.strip(), where=f"{path}:{lineno}")
    for item in overrides:
        if "=" not in item:
            raise CliParseError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        if key not in cfg:
            raise CliParseError(f"--set: unknown key {key!r}")
        cfg[key] = _parse_number(value, where="--set")
    return cfg


def _parse_number(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise CliParseError(f"{where}: not a number: {text!r}") from exc


def device_from_config(cfg: dict) -> DeviceParams:
    return DeviceParams.from_lab_units(
        two_EJ_over_h_GHz=cfg["device.EJ_GHz"],
        Cg_fF=cfg["device.Cg_fF"],
        CJ_fF=cfg["device.CJ_fF"],
        S_um2=cfg["device.S_um2"],
        T1_us=cfg["device.T1_us"],
        T2_ns=cfg["device.T2_ns"],
        ng=cfg["device.ng"],
        phi_c=cfg["device.phi_c"],
        mu=cfg["device.mu"],
    )


def cavity_from_config(cfg: dict) -> CavityParams:
    wavelength = cfg["cavity.lambda_cm"] * 1e-2
    return CavityParams(
        wavelength=wavelength,
        Q=cfg["cavity.Q"],
        T=cfg["cavity.T_mK"] * 1e-3,
        V=cfg["cavity.V_lambda3"] * wavelength ** 3,
        theta=cfg["cavity.theta"],
    )


def _parse_complex_list(text: str, where: str) -> list[complex]:
    out = []
    for piece in text.split(","):
        piece = piece.strip().replace(" ", "")
        try:
            out.append(complex(piece))
        except ValueError as exc:
            raise CliParseError(f"{where}: bad complex literal {piece!r}") from exc
    return out


def cmd_compile(args) -> int:
    cfg = load_config(args.config, args.set or ())
    rates = derive(device_from_config(cfg), cavity_from_config(cfg)).rates
    n_max = int(cfg["sim.n_max"])
    spec = args.target
    if ":" not in spec:
        raise CliParseError(
            f"target must look like fock:m, binary:a1,a2 or coeffs:c0,c1,... "
            f"(got {spec!r})"
        )
    kind, _, payload = spec.partition(":")
    if kind == "fock":
        try:
            m = int(payload)
        except ValueError as exc:
            raise CliParseError(f"fock target needs an integer, got {payload!r}") from exc
        seq = fock_sequence(m, rates, n_max=max(n_max, m + 2))
        coeffs = [0.0] * m + [1.0]
    elif kind == "binary":
        values = _parse_complex_list(payload, "binary target")
        if len(values) != 2:
            raise CliParseError("binary target needs exactly two amplitudes")
        norm = np.linalg.norm(values)
        values = [v / norm for v in values]
        seq = binary_superposition(values[0], values[1], rates,
                                  n_max=max(n_max, 3))
        coeffs = values
    elif kind == "coeffs":
        values = _parse_complex_list(payload, "coeffs target")
        target = TargetState.from_unnormalized(values)
        coeffs = list(target.coefficients)
        seq = synthesize(target, rates, allow_idle=args.allow_idle,
                         n_max=max(n_max, target.top_level + 2))
    else:
        raise CliParseError(f"unknown target kind {kind!r}")

    achieved = fidelity(
        simulate_sequence(seq),
        ket_from_cavity_coefficients(coeffs, seq.n_max),
    )
    Path(args.output).write_text(sequence_to_json(seq) + "\n")
    print(f"wrote {args.output} ({len(seq)} steps)")
    print(f"fidelity = {achieved:.12f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        seq = sequence_from_json(Path(args.sequence).read_text())
    except OSError as exc:
        raise CliParseError(f"cannot read sequence file: {exc}") from exc
    except ValueError as exc:
        raise CliParseError(str(exc)) from exc
    if args.dissipative:
        cfg = load_config(args.config, args.set or ())
        cav = cavity_from_config(cfg)
        dev = device_from_config(cfg)
        channels = DecayChannels.from_times(
            tau_p=photon_lifetime(cav.Q, cav.wavelength),
            T1=dev.T1, T2=dev.T2,
        )
        d = 2 * (seq.n_max + 1)
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        from .dynamics import rwa_hamiltonian

        for step in seq.steps:
            h = rwa_hamiltonian(step.kind, seq.rates, seq.n_max)
            dt = min(stable_step(h, channels), step.duration)
            rho = evolve_density(rho, h, channels, step.duration, dt)
        print("state,population")
        for i in range(d):
            q, n = basis_state(i, seq.n_max)
            print(f"|{QUBIT_LABELS[q]}{n}>,{rho[i, i].real:.12g}")
    else:
        ket = simulate_sequence(seq)
        print("state,magnitude,phase_rad")
        for i, amp in enumerate(ket.amplitudes):
            q, n = basis_state(i, seq.n_max)
            print(f"|{QUBIT_LABELS[q]}{n}>,{abs(amp):.12g},{np.angle(amp):.12g}")
    return EXIT_OK


def cmd_feasibility(args) -> int:
    cfg = load_config(args.config, args.set or ())
    dev = device_from_config(cfg)
    cav = cavity_from_config(cfg)
    report = feasibility_report(dev, cav, args.target_n,
                                margin=cfg["report.margin"])
    print(report_to_json(report, dev, cav))
    return EXIT_OK


def cmd_fig2(args) -> int:
    cfg = load_config(args.config, args.set or ())
    if not 1 <= args.n_min <= args.n_max:
        raise CliParseError(
            f"need 1 <= n-min <= n-max, got {args.n_min}..{args.n_max}"
        )
    dev = device_from_config(cfg)
    n_range = range(args.n_min, args.n_max + 1)
    if args.q_list:
        q_values = [_parse_number(q, "--q-list") for q in args.q_list.split(",")]
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        for q in q_values:
            cav = cavity_from_config({**cfg, "cavity.Q": q})
            curve = fock_ratio_curve(derive(dev, cav), cav, n_range)
            path = outdir / f"fig2_Q{q:g}.csv"
            path.write_text(ratio_curve_csv(curve))
            print(f"wrote {path}")
    else:
        cav = cavity_from_config(cfg)
        curve = fock_ratio_curve(derive(dev, cav), cav, n_range)
        sys.stdout.write(ratio_curve_csv(curve))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.set or ())
    key = args.key
    if key not in cfg:
        raise CliParseError(f"unknown sweep key {key!r}")
    if args.values:
        values = [_parse_number(v, "--values") for v in args.values.split(",")]
    else:
        if args.num < 2:
            raise CliParseError("--num must be >= 2")
        if args.log:
            values = list(np.geomspace(args.start, args.stop, args.num))
        else:
            values = list(np.linspace(args.start, args.stop, args.num))
    print(f"{key},tau_e_s,tau_c0_s,tau_p_s,n_th,single_photon_ok,fock_ok,"
          "superposition_ok,max_fock")
    for value in values:
        point = dict(cfg)
        point[key] = float(value)
        dev = device_from_config(point)
        cav = cavity_from_config(point)
        rep = feasibility_report(dev, cav, args.target_n,
                                 margin=point["report.margin"])
        print(
            f"{value:.12g},{rep.tau_e:.12g},{rep.tau_c[0]:.12g},"
            f"{rep.tau_p:.12g},{rep.n_th:.12g},{rep.single_photon_ok},"
            f"{rep.fock_ok},{rep.superposition_ok},{rep.max_fock}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squidcavity",
        description="Pulse compiler and feasibility estimator for cavity "
                    "photon-state engineering with a SQUID charge qubit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key")

    p = sub.add_parser("compile", help="compile a target state to a pulse sequence")
    add_common(p)
    p.add_argument("target", help="fock:m | binary:a1,a2 | coeffs:c0,c1,...")
    p.add_argument("--allow-idle", action="store_true",
                   help="permit idle steps for off-lattice phases")
    p.add_argument("--output", default="pulse_sequence.json")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="run a sequence file from |g,0>")
    add_common(p)
    p.add_argument("sequence", help="sequence JSON file")
    p.add_argument("--dissipative", action="store_true",
                   help="use the density-matrix engine with config decay rates")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("feasibility", help="timescale feasibility report")
    add_common(p)
    p.add_argument("--target-n", type=int, default=1)
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("fig2", help="lifetime/operation-time ratio curve CSV")
    add_common(p)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--q-list", help="comma-separated Q values, one CSV each")
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("sweep", help="feasibility sweep over one config key")
    add_common(p)
    p.add_argument("--key", required=True)
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--num", type=int, default=0)
    p.add_argument("--log", action="store_true")
    p.add_argument("--target-n", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PhaseUnreachable as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: pass --allow-idle to enable idle-step phase fixes",
              file=sys.stderr)
        return EXIT_UNREACHABLE
    except (SquidCavityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
