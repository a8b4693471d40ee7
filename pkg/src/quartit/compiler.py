"""Compile pulse programs into timed r.f. schedules.

Gate statements expand into selective ideal pulses, which are then mapped to
rectangular drive pulses: carrier at the transition's per-photon frequency,
phase from the rotation axis, duration from the transition's Rabi frequency.
Z rotations never reach the hardware; they shift the phase of later pulses.
"""
from __future__ import annotations

import functools
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import gates
from .dsl import GateProgram, Statement, render
from .dynamics import (
    CalibrationError,
    analytic_rabi_frequency,
    calibrate_rabi_frequency,
    evolve,
    rotating_hamiltonian,
)
from .spin import DIM, Transition, equal_up_to_phase
from .state_prep import prep_sequence
from .system import PhysicalPulse, SpinSystem, transition_frequency

AXIS_PHASE = {"X": 0.0, "Y": np.pi / 2}
STRATEGIES = ("two_photon", "single_photon")


@dataclass(frozen=True)
class CompileOptions:
    """Compiler settings.

    ``omega1`` is the drive amplitude (omega1/2pi, Hz) used for every pulse;
    ``None`` means ``dq / 100``, weak enough for selective pulses.
    """

    strategy: str = "two_photon"
    avoid_three_photon: bool = False
    omega1: float | None = None
    hadamard_variant: str = "xy"
    cnot_variant: str = "single_pulse_y"
    swap_variant: str = "composed"
    prep_variant: str = "single_quantum"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.omega1 is not None and not self.omega1 > 0:
            raise ValueError("omega1 must be positive")

    def drive(self, sys: SpinSystem) -> float:
        if self.omega1 is not None:
            return float(self.omega1)
        if sys.dq == 0:
            raise ValueError("dq = 0: transitions are degenerate and cannot be addressed selectively")
        return sys.dq / 100.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@functools.lru_cache(maxsize=256)
def rabi_frequency(sys: SpinSystem, t: Transition, omega1: float) -> float:
    """Rabi frequency (Hz) of a resonant drive on ``t``.

    Single-quantum lines use ``2 omega1 |<lo|Ix|hi>|``; multi-quantum lines
    are calibrated numerically from the simulated dynamics.
    """
    if not omega1 > 0:
        raise ValueError("omega1 must be positive")
    if t.order == 1:
        return analytic_rabi_frequency(t, omega1)
    return calibrate_rabi_frequency(sys, t, omega1)


def phase_rotation(t: Transition, phase: float, theta: float) -> np.ndarray:
    """Ideal rotation in the ``t`` subspace about an equatorial axis at ``phase``.

    Phase 0 is the X rotation and pi/2 the Y rotation of the gate library.
    """
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    u = np.eye(DIM, dtype=complex)
    u[t.lo, t.lo] = u[t.hi, t.hi] = c
    u[t.lo, t.hi] = -1j * s * np.exp(-1j * phase)
    u[t.hi, t.lo] = -1j * s * np.exp(1j * phase)
    return u


@dataclass(frozen=True)
class ScheduledPulse:
    index: int
    pulse: PhysicalPulse
    source_line: int
    ideal: gates.IdealPulse | None
    provenance: str
    order: int = 1

    @property
    def frame_phase(self) -> float:
        """Phase of the effective rotation, ``order * carrier phase``."""
        return self.order * self.pulse.phase

    def to_dict(self) -> dict:
        ideal = None
        if self.ideal is not None:
            ideal = {"transition": self.ideal.transition.label, "axis": self.ideal.axis,
                     "theta_rad": self.ideal.theta}
        return {
            "index": self.index,
            "carrier_hz": self.pulse.carrier,
            "rabi_hz": self.pulse.rabi_amplitude,
            "phase_rad": self.pulse.phase,
            "duration_s": self.pulse.duration,
            "source_line": self.source_line,
            "ideal": ideal,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class PulseSchedule:
    system: SpinSystem
    options: CompileOptions
    program_hash: str
    pulses: tuple[ScheduledPulse, ...]
    frame: tuple[float, ...]
    ideal_unitary: np.ndarray = field(compare=False)

    @property
    def total_duration(self) -> float:
        return float(sum(p.pulse.duration for p in self.pulses))

    def frame_unitary(self) -> np.ndarray:
        return np.diag(np.exp(-1j * np.asarray(self.frame))).astype(complex)

    def realized_unitary(self) -> np.ndarray:
        """Unitary implied by the physical phases plus the final virtual frame."""
        u = np.eye(DIM, dtype=complex)
        for p in self.pulses:
            if p.ideal is None:
                continue
            theta = 2 * np.pi * rabi_frequency(self.system, p.ideal.transition, p.pulse.rabi_amplitude) \
                * p.pulse.duration
            u = phase_rotation(p.ideal.transition, p.frame_phase, theta) @ u
        return self.frame_unitary() @ u

    def verify(self, tol: float = 1e-9) -> bool:
        ok, _ = equal_up_to_phase(self.realized_unitary(), self.ideal_unitary, tol)
        return ok

    def to_dict(self) -> dict:
        return {
            "system": self.system.to_dict(),
            "options": self.options.to_dict(),
            "program_hash": self.program_hash,
            "pulses": [p.to_dict() for p in self.pulses],
            "frame": list(self.frame),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def expand_statement(s: Statement, options: CompileOptions) -> tuple[gates.PulseSequence, str]:
    """Ideal time-ordered pulses for one statement and a provenance note."""
    if s.op == "H":
        return gates.hadamard(s.args[0], options.hadamard_variant), f"H {s.args[0]} ({options.hadamard_variant})"
    if s.op == "CNOT":
        return gates.cnot(s.args[0], options.cnot_variant), f"CNOT {' '.join(s.args)} ({options.cnot_variant})"
    if s.op in ("RX", "RY", "RZ"):
        seq = gates.logical_rotation(s.args[0], s.op[1], s.radians, options.strategy)
        return seq, f"{s.op} {s.args[0]} ({options.strategy})"
    if s.op == "SWAP":
        return gates.swap(options.swap_variant), f"SWAP ({options.swap_variant})"
    if s.op == "P":
        return (s.ideal_pulse(),), f"raw {s.args[0]}"
    if s.op == "PREP":
        seq = prep_sequence(s.args[0], options.prep_variant)
        return seq, f"PREP {s.args[0]} ({options.prep_variant}; assumes polarized start)"
    if s.op == "WAIT":
        return (), "WAIT (free evolution, not compensated)"
    raise ValueError(f"cannot expand statement {s.op}")


def _lower(p: gates.IdealPulse, options: CompileOptions) -> tuple[gates.PulseSequence, str]:
    # Z rotations stay virtual whatever their order
    if p.axis == "Z" or p.transition.order == 1:
        return (p,), ""
    if options.strategy == "single_photon":
        return gates.appendix_replace(p, "single_photon_only"), f"; {p} replaced by single-quantum pulses"
    if p.transition.order == 3 and options.avoid_three_photon:
        return gates.appendix_replace(p, "no_three_photon"), f"; {p} replaced to avoid three-photon drive"
    return (p,), ""


def compile_program(prog: GateProgram, sys: SpinSystem, options: CompileOptions | None = None) -> PulseSchedule:
    """Turn a parsed program into a deterministic pulse schedule."""
    options = options or CompileOptions()
    omega1 = options.drive(sys)
    alpha = np.zeros(DIM)  # frame: applied virtual rotation is diag(exp(-i alpha))
    ideal_u = np.eye(DIM, dtype=complex)
    out: list[ScheduledPulse] = []

    for s in prog:
        seq, note = expand_statement(s, options)
        if s.op == "WAIT":
            out.append(ScheduledPulse(len(out), PhysicalPulse(sys.larmor, 0.0, 0.0, float(s.value)),
                                      s.line, None, note))
            continue
        for p in seq:
            lowered, extra = _lower(p, options)
            for q in lowered:
                ideal_u = q.unitary() @ ideal_u
                t = q.transition
                if q.axis == "Z":
                    alpha[t.lo] += q.theta / 2
                    alpha[t.hi] -= q.theta / 2
                    continue
                theta, phase = q.theta, AXIS_PHASE[q.axis]
                if theta < 0:
                    theta, phase = -theta, phase + np.pi
                phase = phase + alpha[t.hi] - alpha[t.lo]
                phase = float(np.mod(phase, 2 * np.pi))
                duration = theta / (2 * np.pi * rabi_frequency(sys, t, omega1))
                phys = PhysicalPulse(transition_frequency(sys, t), omega1, phase / t.order, duration)
                out.append(ScheduledPulse(len(out), phys, s.line, q, note + extra, t.order))

    digest = hashlib.sha256(render(prog).encode()).hexdigest()
    return PulseSchedule(sys, options, digest, tuple(out), tuple(float(a) for a in alpha), ideal_u)


def simulate_schedule(schedule: PulseSchedule, rho0: np.ndarray, decoherence: bool = False) -> np.ndarray:
    """Run a schedule through the time-domain engine.

    Each pulse evolves in the rotating frame of its own carrier and frames are
    aligned at pulse boundaries; free precession between differently tuned
    carriers is not tracked. The final virtual frame is applied at the end.
    """
    rho = np.asarray(rho0, dtype=complex)
    for p in schedule.pulses:
        rho = evolve(schedule.system, p.pulse, rho, decoherence)
    f = schedule.frame_unitary()
    return f @ rho @ np.conj(f).T


# Strong degenerate drive ---------------------------------------------------

class UnrealisticDrive(RuntimeError):
    pass


@dataclass(frozen=True)
class DegenerateDrive:
    omega1: float
    duration: float
    transfer03: float
    return12: float
    target03: float

    @property
    def error03(self) -> float:
        return abs(self.transfer03 - self.target03)


def _degenerate_probs(sys: SpinSystem, omega1: float, times) -> tuple[np.ndarray, np.ndarray]:
    h = rotating_hamiltonian(sys, PhysicalPulse(sys.larmor, omega1))
    e, v = np.linalg.eigh(h)
    ph = np.exp(-1j * np.multiply.outer(np.atleast_1d(times), e))
    u30 = ph @ (v[3, :] * np.conj(v[0, :]))
    u11 = ph @ (v[1, :] * np.conj(v[1, :]))
    return np.abs(u30) ** 2, np.abs(u11) ** 2


def degenerate_drive_search(sys: SpinSystem, theta03: float, tol03: float = 1e-3, tol12: float = 1e-4,
                            n_omega: int = 300) -> DegenerateDrive:
    """Drive at the centre frequency rotating (0,3) by ``theta03`` while (1,2) comes back.

    For each trial amplitude on a log grid up to ``10 dq`` the three-photon
    Rabi frequency gives a nominal duration; the duration is then scanned over
    two centre-line periods so the (1,2) rotation closes on a multiple of 2 pi.
    Among candidates with ``|P03 - sin^2(theta03/2)| <= tol03`` and
    ``P11 >= 1 - tol12`` the shortest is refined and returned.
    """
    if not sys.dq > 0:
        raise ValueError("degenerate drive search needs dq > 0")
    if not 0 <= theta03 < 2 * np.pi:
        raise ValueError("theta03 must lie in [0, 2 pi)")
    target = float(np.sin(theta03 / 2) ** 2)
    if theta03 < 1e-9:
        return DegenerateDrive(0.0, 0.0, 0.0, 1.0, target)
    t03 = Transition(0, 3)

    def score(p03, p11):
        return np.maximum(np.abs(p03 - target) / tol03, (1 - p11) / tol12)

    best = None
    for w1 in np.geomspace(1e-2, 10.0, n_omega) * sys.dq:
        try:
            om = calibrate_rabi_frequency(sys, t03, w1, carrier=sys.larmor)
        except CalibrationError:
            continue
        t0 = theta03 / (2 * np.pi * om)
        per = 1.0 / (2 * w1)
        ts = np.linspace(max(t0 - 2 * per, 0.0), t0 + 2 * per, 401)
        sc = score(*_degenerate_probs(sys, w1, ts))
        i = int(np.argmin(sc))
        if sc[i] <= 1 and (best is None or ts[i] < best[1]):
            best = (w1, ts[i], ts[1] - ts[0])
    if best is None:
        raise UnrealisticDrive(f"rotation of (0,3) by {theta03:.4g} rad requires unrealistic drive "
                               f"(no solution with omega1 <= 10 dq)")
    w1, t, dt = best
    res = optimize.minimize_scalar(lambda x: float(score(*_degenerate_probs(sys, w1, x))[0]),
                                   bounds=(max(t - dt, 0.0), t + dt), method="bounded")
    if res.fun < float(score(*_degenerate_probs(sys, w1, t))[0]):
        t = float(res.x)
    p03, p11 = _degenerate_probs(sys, w1, t)
    return DegenerateDrive(float(w1), float(t), float(p03[0]), float(p11[0]), target)
