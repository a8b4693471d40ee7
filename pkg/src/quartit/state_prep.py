"""Effective pure states from a dynamically polarized quartit.

The starting point is the linearly polarized state with populations
``(c+3d, c+2d, c+d, c)``. Short selective-pulse sequences turn it into
``alpha*I/4 + beta*|k><k|`` forms; ``beta`` may be negative (deficit form).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants

from .gates import PulseSequence, compose, pulse
from .spin import DIM, apply, projector

TARGETS = ("00", "01", "10", "11")


def polarized_populations(d: float) -> np.ndarray:
    if not 0 <= d <= 1 / 6 + 1e-15:
        raise ValueError(f"polarization step d={d} outside [0, 1/6]")
    c = (1 - 6 * d) / 4
    return np.array([c + 3 * d, c + 2 * d, c + d, c])


def initial_polarized_state(d: float) -> np.ndarray:
    """Diagonal density matrix whose population grows linearly towards |3/2>."""
    return np.diag(polarized_populations(d)).astype(complex)


def prep_sequence(target: str, variant: str = "single_quantum") -> PulseSequence:
    """Time-ordered pulses turning the polarized state into a pseudopure one.

    ``single_quantum`` uses only single-quantum pulses where that is
    possible (|00>, |11>); ``with_two_photon`` swaps in the single double-quantum
    pi/2 pulse. |01> and |10> always use a double-quantum pulse.
    """
    half, pi = np.pi / 2, np.pi
    if variant not in ("single_quantum", "with_two_photon"):
        raise ValueError(f"unknown prep variant {variant!r}")
    two = variant == "with_two_photon"
    if target == "00":
        return (pulse("X", 1, 3, half),) if two else (pulse("X", 1, 2, pi), pulse("X", 2, 3, half))
    if target == "11":
        return (pulse("X", 0, 2, half),) if two else (pulse("X", 1, 2, pi), pulse("X", 0, 1, half))
    if target == "10":
        return (pulse("X", 0, 2, half), pulse("X", 2, 3, pi))
    if target == "01":
        return (pulse("X", 1, 3, half), pulse("X", 0, 1, pi))
    raise ValueError(f"unknown target {target!r}")


def switch_from_11(target: str) -> PulseSequence:
    """Single pi pulse exchanging the |11> population with the target level."""
    if target not in ("00", "01", "10"):
        raise ValueError(f"cannot switch |11> to {target!r}")
    k = int(target, 2)
    return (pulse("X", k, 3, np.pi),)


def settle(rho: np.ndarray) -> np.ndarray:
    """Drop coherences, as after waiting T2 < t < T1."""
    return np.diag(np.diag(rho)).astype(complex)


def run_sequence(seq, rho: np.ndarray, settle_after: bool = True) -> np.ndarray:
    out = apply(compose(seq), rho)
    return settle(out) if settle_after else out


@dataclass(frozen=True)
class PseudopurityReport:
    target_level: int
    alpha: float
    beta: float
    residual: float
    pseudopure: bool
    verdict: str

    @property
    def form(self) -> str:
        if self.beta > 0:
            return "excess"
        if self.beta < 0:
            return "deficit"
        return "none"


def _fit_level(rho: np.ndarray, k: int):
    basis = [np.eye(DIM) / DIM, projector(k)]
    a = np.array([b.ravel() for b in basis]).T
    coef, *_ = np.linalg.lstsq(a, rho.ravel(), rcond=None)
    coef = coef.real
    rem = rho - coef[0] * basis[0] - coef[1] * basis[1]
    return coef[0], coef[1], float(np.linalg.norm(rem))


def pseudopurity_check(rho: np.ndarray, tol: float = 1e-10) -> PseudopurityReport:
    """Best decomposition ``rho = alpha I/4 + beta |k><k| + remainder``.

    The level with the smallest Frobenius remainder wins. The maximally mixed
    state fits every level with ``beta = 0`` and is reported as such.
    """
    rho = np.asarray(rho, dtype=complex)
    fits = [_fit_level(rho, k) for k in range(DIM)]
    k = int(np.argmin([f[2] for f in fits]))
    alpha, beta, res = fits[k]
    if res < tol and abs(beta) < tol:
        return PseudopurityReport(k, alpha, 0.0, res, False, "maximally mixed")
    ok = res < tol
    verdict = f"pseudopure |{k:02b}> ({'excess' if beta > 0 else 'deficit'})" if ok else "not pseudopure"
    return PseudopurityReport(k, float(alpha), float(beta), res, ok, verdict)


def thermal_fraction(f0: float, temperature: float) -> float:
    """Pure-state fraction available from thermal equilibrium, ``h f0 / (4 kB T)``."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    return constants.h * f0 / (4 * constants.k * temperature)


def prepare(target: str, d: float, variant: str = "single_quantum", via_11: bool = False):
    """Prepare a pseudopure state and return ``(sequence, settled state, report)``."""
    rho = initial_polarized_state(d)
    if via_11 and target != "11":
        first = prep_sequence("11", variant)
        second = switch_from_11(target)
        out = run_sequence(second, run_sequence(first, rho))
        return first + second, out, pseudopurity_check(out)
    seq = prep_sequence(target, variant)
    out = run_sequence(seq, rho)
    return seq, out, pseudopurity_check(out)
