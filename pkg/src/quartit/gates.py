"""Logical two-qubit gates on a quartit built from selective rotations.

Every sequence here is stored in *time order*: the first pulse in the tuple
is applied first. Operator products written right-to-left therefore appear
reversed; each constructor notes the product it implements.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .spin import (
    DIM,
    HADAMARD,
    SIGMA_I,
    Transition,
    equal_up_to_phase,
    phase_distance,
    rotation2,
    selective_rotation,
    tensor2,
)


@dataclass(frozen=True)
class IdealPulse:
    transition: Transition
    axis: str
    theta: float

    def __post_init__(self):
        if self.axis not in ("X", "Y", "Z"):
            raise ValueError(f"unknown axis {self.axis!r}")
        if not np.isfinite(self.theta):
            raise ValueError("pulse angle must be finite")

    def unitary(self) -> np.ndarray:
        return selective_rotation(self.transition, self.axis, self.theta)

    def __str__(self):
        return f"{self.axis}{self.transition.label}({self.theta:.6g})"


PulseSequence = tuple[IdealPulse, ...]


def pulse(axis: str, lo: int, hi: int, theta: float) -> IdealPulse:
    return IdealPulse(Transition(lo, hi), axis, float(theta))


def from_product(*factors: IdealPulse) -> PulseSequence:
    """Turn a right-to-left operator product into time order."""
    return tuple(reversed(factors))


def compose(seq: Iterable[IdealPulse]) -> np.ndarray:
    """Propagator of a time-ordered sequence (last pulse leftmost)."""
    u = np.eye(DIM, dtype=complex)
    for p in seq:
        u = p.unitary() @ u
    return u


# Reference unitaries ------------------------------------------------------

CNOT_A = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CNOT_B = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
HADAMARD_A = tensor2(HADAMARD, SIGMA_I)
HADAMARD_B = tensor2(SIGMA_I, HADAMARD)


def logical_reference(qubit: str, axis: str, theta: float) -> np.ndarray:
    r = rotation2(axis, theta)
    if qubit == "A":
        return tensor2(r, SIGMA_I)
    if qubit == "B":
        return tensor2(SIGMA_I, r)
    raise ValueError(f"unknown logical qubit {qubit!r}")


def cnot_reference(control: str) -> np.ndarray:
    if control == "A":
        return CNOT_A
    if control == "B":
        return CNOT_B
    raise ValueError(f"unknown control qubit {control!r}")


# Gate constructors --------------------------------------------------------

def logical_rotation(qubit: str, axis: str, theta: float, strategy: str = "two_photon") -> PulseSequence:
    """Rotate one logical qubit by ``theta`` about ``axis``.

    Qubit B uses the two outer single-quantum lines and ignores ``strategy``.
    Qubit A uses either the two double-quantum transitions (``two_photon``)
    or a conjugation of the outer lines by a centre-line pi pulse
    (``single_photon``). Commuting pairs come out in ascending-transition order.
    """
    if axis not in ("X", "Y", "Z"):
        raise ValueError(f"unknown axis {axis!r}")
    if qubit == "B":
        return (pulse(axis, 0, 1, theta), pulse(axis, 2, 3, theta))
    if qubit != "A":
        raise ValueError(f"unknown logical qubit {qubit!r}")
    if strategy == "two_photon":
        return (pulse(axis, 0, 2, theta), pulse(axis, 1, 3, theta))
    if strategy == "single_photon":
        # Y12(pi) R01(theta) R23(-+theta) Y12(-pi); Z keeps the same sign on both lines
        inner = theta if axis == "Z" else -theta
        return from_product(
            pulse("Y", 1, 2, np.pi),
            pulse(axis, 0, 1, theta),
            pulse(axis, 2, 3, inner),
            pulse("Y", 1, 2, -np.pi),
        )
    raise ValueError(f"unknown strategy {strategy!r}")


def hadamard(qubit: str, variant: str = "xy") -> PulseSequence:
    """Hadamard on one logical qubit, exact up to a global phase of i."""
    half = np.pi / 2
    if qubit == "A":
        if variant == "xy":
            return from_product(
                pulse("Y", 1, 2, np.pi), pulse("X", 0, 1, np.pi), pulse("Y", 0, 1, half),
                pulse("X", 2, 3, -np.pi), pulse("Y", 2, 3, -half), pulse("Y", 1, 2, -np.pi),
            )
        if variant == "yz":
            return from_product(
                pulse("Y", 1, 2, np.pi), pulse("Y", 0, 1, half), pulse("Z", 0, 1, np.pi),
                pulse("Y", 2, 3, -half), pulse("Z", 2, 3, np.pi), pulse("Y", 1, 2, -np.pi),
            )
    elif qubit == "B":
        if variant == "xy":
            return from_product(
                pulse("X", 0, 1, np.pi), pulse("Y", 0, 1, half),
                pulse("X", 2, 3, np.pi), pulse("Y", 2, 3, half),
            )
        if variant == "yz":
            return from_product(
                pulse("Y", 0, 1, half), pulse("Z", 0, 1, np.pi),
                pulse("Y", 2, 3, half), pulse("Z", 2, 3, np.pi),
            )
    else:
        raise ValueError(f"unknown logical qubit {qubit!r}")
    raise ValueError(f"unknown hadamard variant {variant!r}")


def diagonal_correction(d: np.ndarray) -> PulseSequence:
    """Realize a diagonal unitary (up to global phase) from Z-type rotations.

    Uses the chain of adjacent transitions (0,1), (1,2), (2,3); zero-angle
    pulses are dropped.
    """
    d = np.asarray(d)
    diag = np.diag(d)
    if np.linalg.norm(d - np.diag(diag)) > 1e-10:
        raise ValueError("correction is not diagonal")
    phi = np.angle(diag)
    phi = phi - phi.mean()
    # Z_{i,i+1}(a) adds -a/2 to level i and +a/2 to level i+1
    a01 = -2 * phi[0]
    a12 = a01 - 2 * phi[1]
    a23 = 2 * phi[3]
    out = []
    for (lo, hi), a in (((0, 1), a01), ((1, 2), a12), ((2, 3), a23)):
        a = float(np.remainder(a + 2 * np.pi, 4 * np.pi) - 2 * np.pi)
        if abs(a) > 1e-12:
            out.append(pulse("Z", lo, hi, a))
    return tuple(out)


def cnot(control: str, variant: str = "single_pulse_y") -> PulseSequence:
    """CNOT with ``control`` as control qubit.

    ``single_pulse_y`` and ``single_pulse_x`` are single pi pulses that agree
    with CNOT up to phases; ``exact`` appends the diagonal Z-correction that
    turns the Y pulse into the true CNOT (global phase aside).
    """
    if control == "A":
        t = (2, 3)
    elif control == "B":
        t = (1, 3)
    else:
        raise ValueError(f"unknown control qubit {control!r}")
    if variant == "single_pulse_y":
        return (pulse("Y", *t, np.pi),)
    if variant == "single_pulse_x":
        return (pulse("X", *t, np.pi),)
    if variant == "exact":
        base = (pulse("Y", *t, np.pi),)
        d = cnot_reference(control) @ np.conj(compose(base)).T
        return base + diagonal_correction(d)
    raise ValueError(f"unknown cnot variant {variant!r}")


def swap(variant: str = "composed") -> PulseSequence:
    if variant == "composed":
        return cnot("A", "exact") + cnot("B", "exact") + cnot("A", "exact")
    if variant == "single_pulse_y":
        return (pulse("Y", 1, 2, np.pi),)
    if variant == "single_pulse_x":
        return (pulse("X", 1, 2, np.pi),)
    raise ValueError(f"unknown swap variant {variant!r}")


class NotCovered(ValueError):
    """Raised when no replacement identity exists for a pulse."""


def appendix_replace(p: IdealPulse, target: str = "no_three_photon") -> PulseSequence:
    """Rewrite a multi-quantum X/Y pulse using lower-order transitions.

    ``no_three_photon`` removes (0,3) pulses; ``single_photon_only`` leaves
    only adjacent-level pulses. Single-quantum pulses pass through unchanged.
    """
    if target not in ("no_three_photon", "single_photon_only"):
        raise ValueError(f"unknown replacement target {target!r}")
    t, ax, th = p.transition, p.axis, p.theta
    if t.order == 1:
        return (p,)
    if ax == "Z":
        raise NotCovered(f"Z{t.label}: Z-axis multi-quantum pulses have no replacement identity")
    pi = np.pi
    if t == Transition(0, 3):
        if target == "no_three_photon":
            # R03 = Y13(pi) R01 Y13(-pi)
            return from_product(pulse("Y", 1, 3, pi), pulse(ax, 0, 1, th), pulse("Y", 1, 3, -pi))
        # R03 = Y01(pi) Y23(pi) R12(-th) Y23(-pi) Y01(-pi)
        return from_product(
            pulse("Y", 0, 1, pi), pulse("Y", 2, 3, pi), pulse(ax, 1, 2, -th),
            pulse("Y", 2, 3, -pi), pulse("Y", 0, 1, -pi),
        )
    if target == "no_three_photon":
        return (p,)
    if t == Transition(1, 3):
        # R13 = Y23(pi) R12 Y23(-pi)
        return from_product(pulse("Y", 2, 3, pi), pulse(ax, 1, 2, th), pulse("Y", 2, 3, -pi))
    # R02 = Y12(pi) R01 Y12(-pi)
    return from_product(pulse("Y", 1, 2, pi), pulse(ax, 0, 1, th), pulse("Y", 1, 2, -pi))


# Identity verification ----------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    theta: float | None
    error: float
    status: str  # "exact", "one_sign", "diagonal_phase", "mismatch"
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status in ("exact", "one_sign", "diagonal_phase")


def classify_variant(u: np.ndarray, ref: np.ndarray, tol: float = 1e-10) -> tuple[str, str]:
    """Describe how ``u`` departs from ``ref`` beyond a global phase.

    ``one_sign``: some global phase makes every entry agree except a single
    off-diagonal entry whose sign is flipped. ``diagonal_phase``: ``u`` equals
    ``ref`` times a diagonal unitary (a controlled-phase style correction).
    """
    if phase_distance(u, ref) <= tol:
        return "exact", ""
    support = np.argwhere(np.abs(ref) > tol)
    for i, j in support:
        c = u[i, j] / ref[i, j]
        if abs(abs(c) - 1) > 1e-9:
            continue
        diff = np.argwhere(np.abs(u - c * ref) > tol)
        if len(diff) == 1:
            a, b = diff[0]
            if a != b and abs(u[a, b] + c * ref[a, b]) <= tol:
                return "one_sign", f"sign of entry ({a},{b}) flipped"
    corr = u @ np.conj(ref).T
    if np.linalg.norm(corr - np.diag(np.diag(corr))) <= tol:
        phases = np.angle(np.diag(corr) / np.diag(corr)[0])
        return "diagonal_phase", "differs by diagonal phases " + np.array2string(
            phases, precision=4, suppress_small=True
        )
    return "mismatch", ""


def _check(name, theta, u, ref, tol) -> IdentityCheck:
    err = phase_distance(u, ref)
    status = "exact" if err <= tol else "mismatch"
    return IdentityCheck(name, theta, err, status)


def _identity_table(theta: float):
    """(name, realized unitary, reference unitary) for every angle-dependent identity."""
    rows = []
    for ax in ("X", "Y", "Z"):
        ref_b = logical_reference("B", ax, theta)
        ref_a = logical_reference("A", ax, theta)
        rows.append((f"logical_B_{ax}", compose(logical_rotation("B", ax, theta)), ref_b))
        rows.append((f"logical_A_{ax}_two_photon", compose(logical_rotation("A", ax, theta, "two_photon")), ref_a))
        rows.append((f"logical_A_{ax}_single_photon", compose(logical_rotation("A", ax, theta, "single_photon")), ref_a))
    for ax in ("X", "Y"):
        r03 = selective_rotation(Transition(0, 3), ax, theta)
        for target in ("no_three_photon", "single_photon_only"):
            rows.append((f"replace_{ax}03_{target}", compose(appendix_replace(pulse(ax, 0, 3, theta), target)), r03))
        pi = np.pi
        alternates = {
            "via_Y02": from_product(pulse("Y", 0, 2, pi), pulse(ax, 2, 3, -theta), pulse("Y", 0, 2, -pi)),
            "via_Y01": from_product(pulse("Y", 0, 1, pi), pulse(ax, 1, 3, -theta), pulse("Y", 0, 1, -pi)),
            "via_Y23": from_product(pulse("Y", 2, 3, pi), pulse(ax, 0, 2, theta), pulse("Y", 2, 3, -pi)),
        }
        for label, seq in alternates.items():
            rows.append((f"replace_{ax}03_{label}", compose(seq), r03))
        for lo, hi, alt in (
            (1, 3, from_product(pulse("Y", 1, 2, pi), pulse(ax, 2, 3, -theta), pulse("Y", 1, 2, -pi))),
            (0, 2, from_product(pulse("Y", 0, 1, pi), pulse(ax, 1, 2, -theta), pulse("Y", 0, 1, -pi))),
        ):
            ref = selective_rotation(Transition(lo, hi), ax, theta)
            rows.append((f"replace_{ax}{lo}{hi}_single_photon", compose(appendix_replace(pulse(ax, lo, hi, theta), "single_photon_only")), ref))
            rows.append((f"replace_{ax}{lo}{hi}_single_photon_alt", compose(alt), ref))
    return rows


def verify_identities(theta_grid: Sequence[float], tol: float = 1e-10) -> list[IdentityCheck]:
    """Check every gate identity numerically and report each outcome.

    Angle-dependent identities are evaluated at each grid point. Fixed gates
    (Hadamards, CNOTs, SWAPs) are evaluated once with ``theta=None``. Single
    pulse CNOT/SWAP variants are classified against their exact references
    rather than failed outright.
    """
    grid = list(theta_grid)
    if not grid:
        raise ValueError("theta grid must be nonempty")
    out: list[IdentityCheck] = []
    for th in grid:
        for name, u, ref in _identity_table(float(th)):
            out.append(_check(name, float(th), u, ref, tol))

    for q, ref in (("A", HADAMARD_A), ("B", HADAMARD_B)):
        for v in ("xy", "yz"):
            out.append(_check(f"hadamard_{q}_{v}", None, compose(hadamard(q, v)), ref, tol))
    for c in ("A", "B"):
        ref = cnot_reference(c)
        out.append(_check(f"cnot_{c}_exact", None, compose(cnot(c, "exact")), ref, tol))
        for v in ("single_pulse_y", "single_pulse_x"):
            u = compose(cnot(c, v))
            status, note = classify_variant(u, ref, tol)
            out.append(IdentityCheck(f"cnot_{c}_{v}", None, phase_distance(u, ref), status, note))
    u = compose(cnot("A", "exact")) @ compose(cnot("B", "exact")) @ compose(cnot("A", "exact"))
    out.append(_check("swap_from_cnots", None, u, SWAP, tol))
    out.append(_check("swap_composed", None, compose(swap("composed")), SWAP, tol))
    for v in ("single_pulse_y", "single_pulse_x"):
        u = compose(swap(v))
        status, note = classify_variant(u, SWAP, tol)
        out.append(IdentityCheck(f"swap_{v}", None, phase_distance(u, SWAP), status, note))
    return out


def format_report(checks: Sequence[IdentityCheck]) -> str:
    lines = []
    for c in checks:
        th = "-" if c.theta is None else f"{c.theta:.6g}"
        lines.append(f"{c.name:40s} theta={th:>10s} err={c.error:.3e} {c.status} {c.note}".rstrip())
    return "\n".join(lines)


def equals_reference(seq: Sequence[IdealPulse], ref: np.ndarray, tol: float = 1e-10) -> bool:
    return equal_up_to_phase(compose(seq), ref, tol)[0]
