"""Command-line interface.

Exit codes: 0 ok, 2 usage or parse error, 3 I/O error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys as _sys

import numpy as np

from . import compiler, dsl, dynamics, gates, state_prep, tomography
from .spin import Transition
from .system import ConfigError, SpinSystem, parse_config, profile, transition_frequency

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        _sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read(path: str) -> str:
    if path == "-":
        return _sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_system(name: str | None, decoupled: bool = False) -> SpinSystem:
    """A config file path, or a bundled profile name (default 69Ga)."""
    if name is None:
        return profile("69Ga", decoupled=decoupled)
    if os.path.exists(name):
        return parse_config(_read(name))
    try:
        return profile(name, decoupled=decoupled)
    except KeyError:
        pass
    if os.sep in name or name.endswith(".cfg"):
        raise FileNotFoundError(f"config file not found: {name}")
    raise UsageError(f"--system {name!r} is neither a config file nor a known profile")


def drive_amplitude(value: str, sys: SpinSystem) -> float:
    """``weak`` is dq/10, ``strong`` dq/5, anything else a number in Hz."""
    if value == "weak":
        return sys.dq / 10
    if value == "strong":
        return sys.dq / 5
    try:
        v = float(value)
    except ValueError:
        raise UsageError(f"--omega1 must be 'weak', 'strong' or a number, got {value!r}") from None
    if not v > 0:
        raise UsageError("--omega1 must be positive")
    return v


def _add_system(p: argparse.ArgumentParser):
    p.add_argument("--system", metavar="CFG|PROFILE",
                   help="config file (key = value) or profile name: 69Ga, 71Ga, 75As (default 69Ga)")
    p.add_argument("--decoupled", action="store_true",
                   help="with a profile name: electrons decoupled (no Knight shift, T2 = 1.5 ms)")


def _add_output(p: argparse.ArgumentParser):
    p.add_argument("-o", "--output", metavar="PATH", help="write here instead of stdout")


# Subcommands -------------------------------------------------------------------

def cmd_compile(args) -> int:
    sys = load_system(args.system, args.decoupled)
    prog = dsl.parse_program(_read(args.program))
    opts = compiler.CompileOptions(
        strategy=args.strategy, avoid_three_photon=args.avoid_three_photon, omega1=args.omega1,
        hadamard_variant=args.hadamard_variant, cnot_variant=args.cnot_variant,
        swap_variant=args.swap_variant, prep_variant=args.prep_variant,
    )
    sched = compiler.compile_program(prog, sys, opts)
    _emit(sched.to_json(), args.output)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    sys = load_system(args.system, args.decoupled)
    omega1 = drive_amplitude(args.omega1, sys)
    span = args.span if args.span is not None else 6 * sys.dq
    freqs = np.linspace(sys.larmor - span, sys.larmor + span, args.points)
    if args.map:
        tmin, tmax, n = args.map
        tps = np.linspace(tmin, tmax, int(n))
        values = dynamics.spectrum_2d(sys, omega1, tps, freqs, args.decoherence)
        _emit(dynamics.map_to_csv(freqs, tps, values), args.output)
    else:
        spec = dynamics.spectrum(sys, omega1, args.tp, freqs, args.decoherence)
        _emit(spec.to_csv(), args.output)
    return EXIT_OK


def cmd_rabi(args) -> int:
    sys = load_system(args.system, args.decoupled)
    t = Transition.parse(args.transition)
    omega1 = drive_amplitude(args.omega1, sys)
    carrier = transition_frequency(sys, t) if args.carrier is None else args.carrier
    tps = np.linspace(0.0, args.tmax, args.points)
    trace = dynamics.rabi_trace(sys, carrier, omega1, tps, decoherence=not args.no_decoherence)
    if args.noise:
        rng = np.random.default_rng(args.seed)
        noisy = trace.delta_rxx + rng.normal(0.0, args.noise, size=len(tps))
        trace = dynamics.TimeTrace(trace.t_p, noisy, trace.mz)
    _emit(trace.to_csv(), args.output)
    return EXIT_OK


def cmd_fit(args) -> int:
    trace = dynamics.TimeTrace.from_csv(_read(args.input))
    fit = dynamics.fit_damped_rabi(trace)
    _emit(_dump(fit.to_dict()), args.output)
    return EXIT_OK


def _tomo_state(name: str, rng: np.random.Generator, sys: SpinSystem) -> np.ndarray:
    if name == "random":
        return tomography.random_density_matrix(rng)
    if name == "random-pure":
        return tomography.random_density_matrix(rng, pure=True)
    if name == "polarized":
        return state_prep.initial_polarized_state(sys.pol_step)
    if name.startswith("pseudopure-"):
        return state_prep.prepare(name.split("-", 1)[1], sys.pol_step)[1]
    raise UsageError(f"unknown --state {name!r}")


def cmd_tomo(args) -> int:
    sys = load_system(args.system, args.decoupled)
    rng = np.random.default_rng(args.seed)
    truth = None
    if args.records:
        records = tomography.records_from_json(_read(args.records))
    else:
        truth = _tomo_state(args.state, rng, sys)
        records = tomography.simulate_records(truth, args.noise, rng)
        if args.emit_records:
            _emit(tomography.records_to_json(records) + "\n", args.emit_records)
    rep = tomography.reconstruct(records)
    out = rep.to_dict()
    if truth is not None:
        out["true_rho_real"] = np.real(truth).tolist()
        out["true_rho_imag"] = np.imag(truth).tolist()
        out["frobenius_error"] = float(np.linalg.norm(rep.rho - truth))
    _emit(_dump(out), args.output)
    return EXIT_OK


def cmd_prep(args) -> int:
    sys = load_system(args.system, args.decoupled)
    d = sys.pol_step if args.d is None else args.d
    seq, rho, rep = state_prep.prepare(args.target, d, args.variant, args.via_11)
    out = {
        "target": args.target,
        "d": d,
        "sequence": [{"transition": p.transition.label, "axis": p.axis, "theta_rad": p.theta} for p in seq],
        "initial_populations": state_prep.polarized_populations(d).tolist(),
        "populations": np.real(np.diag(rho)).tolist(),
        "target_level": rep.target_level,
        "alpha": rep.alpha,
        "beta": rep.beta,
        "residual": rep.residual,
        "pseudopure": rep.pseudopure,
        "verdict": rep.verdict,
    }
    _emit(_dump(out), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = [0.0, np.pi / 4, np.pi / 2, np.pi, 2.3, 2 * np.pi]
    checks = gates.verify_identities(grid)
    _emit(gates.format_report(checks), args.output)
    return EXIT_OK


def cmd_degenerate(args) -> int:
    sys = load_system(args.system, args.decoupled)
    res = compiler.degenerate_drive_search(sys, np.radians(args.theta))
    _emit(_dump({"omega1_hz": res.omega1, "duration_s": res.duration, "transfer03": res.transfer03,
                 "return12": res.return12, "target03": res.target03}), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quartit", description="Spin-3/2 two-qubit NMR toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a pulse program into a JSON schedule")
    p.add_argument("program", help="program file, or - for stdin")
    _add_system(p)
    p.add_argument("--strategy", choices=compiler.STRATEGIES, default="two_photon",
                   help="how qubit-A rotations are built (default two_photon)")
    p.add_argument("--avoid-three-photon", action="store_true", help="rewrite (0,3) pulses with lower-order ones")
    p.add_argument("--omega1", type=float, help="drive amplitude in Hz (default dq/100)")
    p.add_argument("--hadamard-variant", choices=("xy", "yz"), default="xy")
    p.add_argument("--cnot-variant", choices=("single_pulse_y", "single_pulse_x", "exact"),
                   default="single_pulse_y")
    p.add_argument("--swap-variant", choices=("composed", "single_pulse_y", "single_pulse_x"), default="composed")
    p.add_argument("--prep-variant", choices=("single_quantum", "with_two_photon"),
                   default="single_quantum")
    _add_output(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("spectrum", help="readout against carrier frequency (CSV)")
    _add_system(p)
    p.add_argument("--tp", type=float, default=dynamics.DEFAULT_SPECTRUM_TP, help="pulse length in s (default 0.126e-3)")
    p.add_argument("--omega1", default="weak", help="weak (dq/10), strong (dq/5) or a value in Hz")
    p.add_argument("--points", type=int, default=201, help="frequency points (default 201)")
    p.add_argument("--span", type=float, help="half-width around the Larmor frequency in Hz (default 6 dq)")
    p.add_argument("--map", nargs=3, type=float, metavar=("TP_MIN", "TP_MAX", "N"),
                   help="emit a frequency x pulse-length map instead of one spectrum")
    p.add_argument("--decoherence", action="store_true", help="include T1/T2 relaxation")
    _add_output(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("rabi", help="readout against pulse length on one transition (CSV)")
    _add_system(p)
    p.add_argument("--transition", default="23", help="level pair, e.g. 23 or 02 (default 23)")
    p.add_argument("--omega1", default="weak", help="weak (dq/10), strong (dq/5) or a value in Hz")
    p.add_argument("--carrier", type=float, help="carrier in Hz (default: the transition frequency)")
    p.add_argument("--tmax", type=float, default=2e-3, help="longest pulse in s (default 2e-3)")
    p.add_argument("--points", type=int, default=201, help="number of pulse lengths (default 201)")
    p.add_argument("--no-decoherence", action="store_true", help="ignore T1/T2")
    p.add_argument("--noise", type=float, default=0.0, help="additive Gaussian noise, ohm")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    _add_output(p)
    p.set_defaults(func=cmd_rabi)

    p = sub.add_parser("fit", help="fit A(1 - cos(Wt) exp(-t/T2)) to a trace CSV")
    p.add_argument("--input", required=True, help="CSV with header t_p_s,delta_rxx_ohm[,mz]")
    _add_output(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("tomo", help="reconstruct a density matrix from readout records (JSON)")
    _add_system(p)
    p.add_argument("--state", default="random",
                   help="simulated state: random, random-pure, polarized, pseudopure-00 ... (default random)")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise on each signal")
    p.add_argument("--seed", type=int, default=0, help="state and noise seed (default 0)")
    p.add_argument("--records", help="reconstruct from this JSON record file instead of simulating")
    p.add_argument("--emit-records", metavar="PATH", help="also write the simulated records")
    _add_output(p)
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("prep", help="pseudopure state preparation (JSON)")
    p.add_argument("target", choices=state_prep.TARGETS)
    _add_system(p)
    p.add_argument("--d", type=float, help="polarization step (default: the system's pol_step_d)")
    p.add_argument("--variant", choices=("single_quantum", "with_two_photon"),
                   default="single_quantum")
    p.add_argument("--via-11", action="store_true", help="prepare |11> first, then switch")
    _add_output(p)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("verify", help="check every gate identity and print the report")
    _add_output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("degenerate", help="search a centre-line drive rotating (0,3) only")
    _add_system(p)
    p.add_argument("--theta", type=float, required=True, help="(0,3) rotation angle in degrees")
    _add_output(p)
    p.set_defaults(func=cmd_degenerate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except dsl.ParseError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except (UsageError, ConfigError, tomography.MissingSettings, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_IO
    except (dynamics.CalibrationError, dynamics.FitError, compiler.UnrealisticDrive,
            tomography.RankError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
