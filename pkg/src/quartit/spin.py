"""Spin-3/2 operator algebra for a quartit.

Levels are ordered ``|0> = |3/2>, |1> = |1/2>, |2> = |-1/2>, |3> = |-3/2>``,
which doubles as the two-qubit basis ``|00>, |01>, |10>, |11>`` with qubit A
as the most significant bit.

Unitaries and density matrices are plain ``numpy`` arrays of shape (4, 4);
the ``is_unitary`` / ``is_density_matrix`` helpers check the invariants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

DIM = 4
ATOL = 1e-12
EIG_ATOL = 1e-10

Axis = Literal["X", "Y", "Z"]
AXES: tuple[str, ...] = ("X", "Y", "Z")

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True, order=True)
class Transition:
    """A pair of levels ``lo < hi`` addressed by a selective pulse."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (0 <= self.lo < DIM and 0 <= self.hi < DIM):
            raise ValueError(f"level index out of range: ({self.lo}, {self.hi})")
        if self.lo >= self.hi:
            raise ValueError(f"transition needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def order(self) -> int:
        """Number of quanta ``hi - lo`` (1, 2 or 3)."""
        return self.hi - self.lo

    @property
    def label(self) -> str:
        return f"{self.lo}{self.hi}"

    @classmethod
    def parse(cls, label: str) -> "Transition":
        if len(label) != 2 or not label.isdigit():
            raise ValueError(f"bad transition label {label!r}")
        return cls(int(label[0]), int(label[1]))

    def __str__(self):
        return self.label


ALL_TRANSITIONS: tuple[Transition, ...] = tuple(
    Transition(lo, hi) for lo in range(DIM) for hi in range(lo + 1, DIM)
)


class SpinOperators(NamedTuple):
    ix: np.ndarray
    iy: np.ndarray
    iz: np.ndarray
    q: np.ndarray


def spin_operators() -> SpinOperators:
    """Return Ix, Iy, Iz for I = 3/2 and the quadrupole pattern diag(1, -1, -1, 1)."""
    m = np.array([1.5, 0.5, -0.5, -1.5])
    iz = np.diag(m).astype(complex)
    # <m+1| I+ |m> = sqrt(I(I+1) - m(m+1)); rows ordered by decreasing m
    iplus = np.zeros((DIM, DIM), dtype=complex)
    for k in range(1, DIM):
        mk = m[k]
        iplus[k - 1, k] = np.sqrt(1.5 * 2.5 - mk * (mk + 1))
    iminus = iplus.conj().T
    ix = (iplus + iminus) / 2
    iy = (iplus - iminus) / 2j
    q = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)
    return SpinOperators(ix, iy, iz, q)


_OPS = spin_operators()
IZ = _OPS.iz


def rotation2(axis: str, theta: float) -> np.ndarray:
    """2x2 rotation about a coordinate axis with the half-angle convention."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    raise ValueError(f"unknown axis {axis!r}")


def qubit_rotation(n, theta: float) -> np.ndarray:
    """Bloch-sphere rotation ``cos(theta/2) I - i sin(theta/2) n.sigma``."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError("rotation axis must be a unit 3-vector")
    ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return np.cos(theta / 2) * SIGMA_I - 1j * np.sin(theta / 2) * ns


def selective_rotation(t: Transition, axis: str, theta: float) -> np.ndarray:
    """Embed a 2x2 axis rotation into levels ``(t.lo, t.hi)``; identity elsewhere."""
    if not np.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    u = np.eye(DIM, dtype=complex)
    idx = [t.lo, t.hi]
    u[np.ix_(idx, idx)] = rotation2(axis, theta)
    return u


def tensor2(ua: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Kronecker product with qubit A as the high bit."""
    return np.kron(np.asarray(ua, dtype=complex), np.asarray(ub, dtype=complex))


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-10):
    """Compare two unitaries modulo a global phase.

    Returns
    -------
    (bool, complex or None)
        Whether ``min_c ||u - c v||_F <= tol`` and the optimal unit-modulus
        ``c = tr(v^H u) / |tr(v^H u)|``. When the overlap vanishes no phase
        is defined and ``(False, None)`` is returned.
    """
    overlap = np.trace(np.conj(v).T @ u)
    if abs(overlap) < 1e-14:
        return False, None
    c = overlap / abs(overlap)
    return bool(np.linalg.norm(u - c * v) <= tol), complex(c)


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Frobenius distance after the best global phase; inf when orthogonal."""
    ok, c = equal_up_to_phase(u, v, tol=np.inf)
    if c is None:
        return float("inf")
    return float(np.linalg.norm(u - c * v))


def mz(rho: np.ndarray) -> float:
    """Longitudinal magnetization ``tr(rho Iz)`` in units of hbar."""
    return float(np.real(np.trace(rho @ IZ)))


def apply(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ np.conj(u).T


def projector(k: int) -> np.ndarray:
    p = np.zeros((DIM, DIM), dtype=complex)
    p[k, k] = 1.0
    return p


def is_unitary(u: np.ndarray, tol: float = ATOL) -> bool:
    u = np.asarray(u)
    if u.shape != (DIM, DIM):
        return False
    if np.linalg.norm(np.conj(u).T @ u - np.eye(DIM)) > tol:
        return False
    return abs(abs(np.linalg.det(u)) - 1.0) <= tol


def is_density_matrix(rho: np.ndarray, tol: float = ATOL, eig_tol: float = EIG_ATOL) -> bool:
    rho = np.asarray(rho)
    if rho.shape != (DIM, DIM):
        return False
    if np.linalg.norm(rho - np.conj(rho).T) > tol:
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh((rho + np.conj(rho).T) / 2).min() >= -eig_tol)
