"""Mz-detection state tomography for a quartit.

Each setting applies one pi/2 selective rotation (or nothing) and reads the
three adjacent population differences. Thirteen settings give 39 linear
equations in the 15 real parameters of a unit-trace Hermitian 4x4 matrix,
which are solved by least squares.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .spin import ALL_TRANSITIONS, DIM, apply, selective_rotation

IDENTITY_LABEL = "I"


def tomography_rotations() -> list[tuple[str, np.ndarray]]:
    """The twelve X/Y pi/2 rotations, one pair per transition."""
    out = []
    for t in ALL_TRANSITIONS:
        for ax in ("X", "Y"):
            out.append((f"{ax}{t.label}", selective_rotation(t, ax, np.pi / 2)))
    return out


def settings() -> list[tuple[str, np.ndarray]]:
    return [(IDENTITY_LABEL, np.eye(DIM, dtype=complex))] + tomography_rotations()


SETTING_LABELS = tuple(label for label, _ in settings())


def readout_signals(rho: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``(p1 - p0, p2 - p1, p3 - p2)`` of the rotated state."""
    p = np.real(np.diag(apply(r, rho)))
    return np.diff(p)


@dataclass(frozen=True)
class TomographyRecord:
    setting: str
    signals: tuple[float, float, float]

    def to_dict(self) -> dict:
        s1, s2, s3 = self.signals
        return {"setting_label": self.setting, "s1": s1, "s2": s2, "s3": s3}

    @classmethod
    def from_dict(cls, d: dict) -> "TomographyRecord":
        return cls(str(d["setting_label"]), (float(d["s1"]), float(d["s2"]), float(d["s3"])))


# Parameterization: rho = I/4 + sum_k x_k B_k with traceless Hermitian B_k.
#   x[0:3]  adjacent diagonal differences rho_{i+1,i+1} - rho_ii
#   x[3:9]  Re rho_ij for i < j in ALL_TRANSITIONS order
#   x[9:15] Im rho_ij for i < j
PARAM_NAMES = (
    ["d01", "d12", "d23"]
    + [f"Re{t.label}" for t in ALL_TRANSITIONS]
    + [f"Im{t.label}" for t in ALL_TRANSITIONS]
)
N_PARAMS = 15


def _diag_basis(k: int) -> np.ndarray:
    # unit increase of rho_{k+1,k+1} - rho_kk, other differences fixed, trace 0
    steps = np.zeros(DIM - 1)
    steps[k] = 1.0
    p = np.concatenate([[0.0], np.cumsum(steps)])
    return np.diag(p - p.mean()).astype(complex)


def parameter_basis() -> list[np.ndarray]:
    basis = [_diag_basis(k) for k in range(DIM - 1)]
    for t in ALL_TRANSITIONS:
        b = np.zeros((DIM, DIM), dtype=complex)
        b[t.lo, t.hi] = b[t.hi, t.lo] = 1.0
        basis.append(b)
    for t in ALL_TRANSITIONS:
        b = np.zeros((DIM, DIM), dtype=complex)
        b[t.lo, t.hi] = 1j
        b[t.hi, t.lo] = -1j
        basis.append(b)
    return basis


def rho_from_params(x: np.ndarray) -> np.ndarray:
    rho = np.eye(DIM, dtype=complex) / DIM
    for xk, b in zip(x, parameter_basis()):
        rho = rho + xk * b
    return rho


def params_from_rho(rho: np.ndarray) -> np.ndarray:
    p = np.real(np.diag(rho))
    re = [rho[t.lo, t.hi].real for t in ALL_TRANSITIONS]
    im = [rho[t.lo, t.hi].imag for t in ALL_TRANSITIONS]
    return np.concatenate([np.diff(p), re, im])


class RankError(RuntimeError):
    pass


def build_linear_map(labels=None) -> np.ndarray:
    """Measurement matrix (3 signals per setting) x 15 parameters.

    Columns are obtained by pushing each traceless basis deviation through
    :func:`readout_signals`; the maximally mixed offset produces no signal, so
    the map is purely linear.
    """
    table = dict(settings())
    labels = SETTING_LABELS if labels is None else tuple(labels)
    basis = parameter_basis()
    rows = []
    for lab in labels:
        r = table[lab]
        rows.append(np.array([readout_signals(b, r) for b in basis]).T)
    a = np.vstack(rows)
    if labels == SETTING_LABELS:
        rank = np.linalg.matrix_rank(a, tol=1e-6)
        if rank < N_PARAMS:
            raise RankError(f"measurement map has rank {rank} < {N_PARAMS}")
    return a


def simulate_records(rho: np.ndarray, noise: float = 0.0, rng: np.random.Generator | None = None,
                     labels=None) -> list[TomographyRecord]:
    table = dict(settings())
    labels = SETTING_LABELS if labels is None else labels
    out = []
    for lab in labels:
        s = readout_signals(rho, table[lab])
        if noise:
            s = s + (rng or np.random.default_rng()).normal(0.0, noise, size=3)
        out.append(TomographyRecord(lab, tuple(float(v) for v in s)))
    return out


@dataclass(frozen=True)
class ReconstructionReport:
    rho: np.ndarray
    rho_linear: np.ndarray
    residual: float
    condition_number: float
    psd_projected: bool
    inconsistent: bool

    def to_dict(self) -> dict:
        return {
            "rho_real": np.real(self.rho).tolist(),
            "rho_imag": np.imag(self.rho).tolist(),
            "residual": self.residual,
            "condition_number": self.condition_number,
            "psd_projected": self.psd_projected,
            "inconsistent": self.inconsistent,
        }


class MissingSettings(ValueError):
    pass


def project_psd(rho: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues and renormalize to unit trace."""
    w, v = np.linalg.eigh((rho + np.conj(rho).T) / 2)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ np.conj(v).T
    return out / np.trace(out).real


def reconstruct(records, psd_tol: float = 1e-8, inconsistency: float = 0.5) -> ReconstructionReport:
    """Linear-inversion estimate of the density matrix from tomography records.

    Hermiticity and unit trace hold by construction. If the estimate has an
    eigenvalue below ``-psd_tol`` it is projected to the nearest physical
    state and ``psd_projected`` is set. ``residual`` is the RMS signal misfit;
    a residual above ``inconsistency`` is flagged but still returned.
    """
    by_label: dict[str, list[np.ndarray]] = {}
    for rec in records:
        by_label.setdefault(rec.setting, []).append(np.asarray(rec.signals, dtype=float))
    unknown = sorted(set(by_label) - set(SETTING_LABELS))
    if unknown:
        raise MissingSettings(f"unknown settings: {', '.join(unknown)}")
    missing = [lab for lab in SETTING_LABELS if lab not in by_label]
    if missing:
        raise MissingSettings(f"missing settings: {', '.join(missing)}")
    labels, ys = [], []
    for lab in SETTING_LABELS:
        for s in by_label[lab]:
            labels.append(lab)
            ys.append(s)
    a = build_linear_map(labels)
    y = np.concatenate(ys)
    x, *_ = np.linalg.lstsq(a, y, rcond=None)
    sv = np.linalg.svd(a, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    residual = float(np.sqrt(np.mean((a @ x - y) ** 2)))
    rho_lin = rho_from_params(x)
    rho = rho_lin
    projected = bool(np.linalg.eigvalsh(rho_lin).min() < -psd_tol)
    if projected:
        rho = project_psd(rho_lin)
    return ReconstructionReport(rho, rho_lin, residual, cond, projected, residual > inconsistency)


def records_to_json(records) -> str:
    return json.dumps([r.to_dict() for r in records], indent=2)


def records_from_json(text: str) -> list[TomographyRecord]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("records", [])
    return [TomographyRecord.from_dict(d) for d in data]


def random_density_matrix(rng: np.random.Generator, pure: bool = False, rank: int | None = None) -> np.ndarray:
    """Haar-random pure state, or a Ginibre-distributed mixed state."""
    if pure:
        psi = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
        psi /= np.linalg.norm(psi)
        return np.outer(psi, np.conj(psi))
    k = rank or DIM
    g = rng.normal(size=(DIM, k)) + 1j * rng.normal(size=(DIM, k))
    rho = g @ np.conj(g).T
    return rho / np.trace(rho).real
