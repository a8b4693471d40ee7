"""Rotating-frame dynamics of a driven quadrupolar spin-3/2.

The quadrupole term is diagonal and commutes with Iz, so in the frame
rotating at the carrier (with the rotating-wave approximation on the drive)
the generator is time independent and propagation is an exact matrix
exponential. Decoherence is phenomenological: Iz-basis dephasing at 1/T2 and
population relaxation at 1/T1 towards the polarized state.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

from .spin import DIM, IZ, Transition, spin_operators
from .state_prep import initial_polarized_state, polarized_populations
from .system import PhysicalPulse, SpinSystem, transition_frequency

TWO_PI = 2 * np.pi
_OPS = spin_operators()


class CalibrationError(RuntimeError):
    pass


class FitError(RuntimeError):
    pass


# Hamiltonian and propagation ----------------------------------------------

def rotating_hamiltonian(sys: SpinSystem, p: PhysicalPulse) -> np.ndarray:
    """Rotating-frame generator ``H/hbar`` in rad/s.

    ``2 pi [-(f_L - carrier) Iz + dq Q + omega1 (Ix cos phi + Iy sin phi)]``
    where ``f_L`` includes the Knight shift when electrons are present. The
    sign of the Iz term puts the (0,1) line at ``f_L - 2 dq``.
    """
    ix, iy, iz, q = _OPS
    detuning = sys.larmor - p.carrier
    h = -detuning * iz + sys.dq * q
    h = h + p.rabi_amplitude * (np.cos(p.phase) * ix + np.sin(p.phase) * iy)
    return TWO_PI * h


def _check_hermitian(h: np.ndarray):
    if np.linalg.norm(h - np.conj(h).T) > 1e-12 * max(1.0, np.linalg.norm(h)):
        raise ValueError("generator is not Hermitian")


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` via Hermitian eigendecomposition."""
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    _check_hermitian(h)
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e * t)) @ np.conj(v).T


def propagate(h: np.ndarray, t: float, rho: np.ndarray) -> np.ndarray:
    if t == 0:
        _check_hermitian(h)
        return np.array(rho, dtype=complex)
    u = propagator(h, t)
    return u @ rho @ np.conj(u).T


def max_step(sys: SpinSystem, h: np.ndarray) -> float:
    """Largest splitting substep allowed for generator ``h``."""
    rate = np.max(np.abs(h)) / TWO_PI
    fast = 1.0 / (TWO_PI * rate) if rate > 0 else math.inf
    return min(sys.t2, fast) / 50


def _step_superoperator(u: np.ndarray, dt: float, sys: SpinSystem) -> np.ndarray:
    """Affine map on ``[vec(rho), 1]`` for one symmetric splitting step.

    Half a dissipative step, the unitary step, half a dissipative step.
    ``vec`` is row-major so ``vec(U rho U^H) = kron(U, conj(U)) vec(rho)``.
    """
    n = DIM * DIM
    coh = math.exp(-0.5 * dt / sys.t2)
    pop = math.exp(-0.5 * dt / sys.t1)
    p_eq = polarized_populations(sys.pol_step)
    half = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(DIM):
        for j in range(DIM):
            k = i * DIM + j
            if i == j:
                half[k, k] = pop
                half[k, n] = p_eq[i] * (1 - pop)
            else:
                half[k, k] = coh
    half[n, n] = 1.0
    unit = np.zeros_like(half)
    unit[:n, :n] = np.kron(u, np.conj(u))
    unit[n, n] = 1.0
    return half @ unit @ half


def propagate_decohering(h: np.ndarray, t: float, rho: np.ndarray, sys: SpinSystem, dt: float | None = None) -> np.ndarray:
    """Piecewise unitary + dephasing/relaxation evolution over time ``t``.

    Uses equal steps no longer than ``dt`` (default :func:`max_step`). The
    step map is constant, so ``n`` steps are taken by repeated squaring.
    """
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    if t == 0:
        return np.array(rho, dtype=complex)
    if math.isinf(sys.t1) and math.isinf(sys.t2):
        return propagate(h, t, rho)
    dt_max = max_step(sys, h) if dt is None else dt
    nsteps = max(1, math.ceil(t / dt_max))
    step = t / nsteps
    m = _step_superoperator(propagator(h, step), step, sys)
    total = np.linalg.matrix_power(m, nsteps)
    vec = np.append(np.asarray(rho, dtype=complex).ravel(), 1.0)
    out = (total @ vec)[:-1].reshape(DIM, DIM)
    return (out + np.conj(out).T) / 2


def evolve(sys: SpinSystem, p: PhysicalPulse, rho: np.ndarray, decoherence: bool = False) -> np.ndarray:
    h = rotating_hamiltonian(sys, p)
    if decoherence:
        return propagate_decohering(h, p.duration, rho, sys)
    return propagate(h, p.duration, rho)


def mz_of(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ IZ)))


# Traces and spectra ---------------------------------------------------------

@dataclass(frozen=True)
class TimeTrace:
    t_p: np.ndarray
    delta_rxx: np.ndarray
    mz: np.ndarray

    def __post_init__(self):
        if len(self.t_p) > 1 and np.any(np.diff(self.t_p) <= 0):
            raise ValueError("pulse durations must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t_p_s,delta_rxx_ohm,mz\n")
        for row in zip(self.t_p, self.delta_rxx, self.mz):
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TimeTrace":
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        mz = data[:, 2] if data.shape[1] > 2 else np.full(len(data), np.nan)
        return cls(data[:, 0], data[:, 1], mz)


@dataclass(frozen=True)
class Spectrum:
    frequency: np.ndarray
    delta_rxx: np.ndarray

    def __post_init__(self):
        if len(self.frequency) > 1 and np.any(np.diff(self.frequency) <= 0):
            raise ValueError("frequencies must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("frequency_hz,delta_rxx_ohm\n")
        for f, y in zip(self.frequency, self.delta_rxx):
            buf.write(f"{float(f)!r},{float(y)!r}\n")
        return buf.getvalue()


def _initial(sys: SpinSystem, rho0):
    return initial_polarized_state(sys.pol_step) if rho0 is None else np.asarray(rho0, dtype=complex)


def _mz_after(h: np.ndarray, tps: np.ndarray, rho0: np.ndarray) -> np.ndarray:
    """Mz after each duration in ``tps`` under a fixed generator."""
    e, v = np.linalg.eigh(h)
    r = np.conj(v).T @ rho0 @ v
    izv = np.conj(v).T @ IZ @ v
    # Mz(t) = sum_jk r_jk izv_kj exp(-i (e_j - e_k) t)
    w = r * izv.T
    de = e[:, None] - e[None, :]
    ph = np.exp(-1j * np.multiply.outer(tps, de))
    return np.real(np.einsum("tjk,jk->t", ph, w))


def rabi_trace(sys: SpinSystem, carrier: float, omega1: float, tp_grid, decoherence: bool = False,
               phase: float = 0.0, rho0: np.ndarray | None = None) -> TimeTrace:
    """Readout ``kappa (Mz(0) - Mz(tp))`` against pulse duration."""
    tps = np.asarray(tp_grid, dtype=float)
    rho = _initial(sys, rho0)
    mz0 = mz_of(rho)
    h = rotating_hamiltonian(sys, PhysicalPulse(carrier, omega1, phase))
    if decoherence:
        mz = np.array([mz_of(propagate_decohering(h, t, rho, sys)) for t in tps])
    else:
        mz = _mz_after(h, tps, rho)
    mz[tps == 0] = mz0
    return TimeTrace(tps, sys.kappa * (mz0 - mz), mz)


def default_frequency_grid(sys: SpinSystem, n: int = 201) -> np.ndarray:
    """``n`` points spanning ``f_L +- 3*(2 dq)``."""
    span = 6 * sys.dq if sys.dq > 0 else 1.0e3
    return np.linspace(sys.larmor - span, sys.larmor + span, n)


DEFAULT_SPECTRUM_TP = 0.126e-3


def spectrum_2d(sys: SpinSystem, omega1: float, tp_grid, freq_grid, decoherence: bool = False,
                rho0: np.ndarray | None = None) -> np.ndarray:
    """Readout map with shape ``(len(freq_grid), len(tp_grid))``."""
    tps = np.asarray(tp_grid, dtype=float)
    freqs = np.asarray(freq_grid, dtype=float)
    rho = _initial(sys, rho0)
    mz0 = mz_of(rho)
    out = np.empty((len(freqs), len(tps)))
    for i, f in enumerate(freqs):
        out[i] = rabi_trace(sys, f, omega1, tps, decoherence, rho0=rho).mz
    return sys.kappa * (mz0 - out)


def spectrum(sys: SpinSystem, omega1: float, tp: float = DEFAULT_SPECTRUM_TP, freq_grid=None,
             decoherence: bool = False, rho0: np.ndarray | None = None) -> Spectrum:
    freqs = default_frequency_grid(sys) if freq_grid is None else np.asarray(freq_grid, dtype=float)
    col = spectrum_2d(sys, omega1, [tp], freqs, decoherence, rho0)[:, 0]
    return Spectrum(freqs, col)


def map_to_csv(freq_grid, tp_grid, values: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write("frequency_hz,t_p_s,delta_rxx_ohm\n")
    for i, f in enumerate(freq_grid):
        for j, t in enumerate(tp_grid):
            buf.write(f"{float(f)!r},{float(t)!r},{float(values[i, j])!r}\n")
    return buf.getvalue()


def find_peaks(spec: Spectrum, rel_prominence: float = 0.2) -> np.ndarray:
    """Indices of local maxima whose prominence exceeds a fraction of the tallest."""
    y = np.asarray(spec.delta_rxx)
    scale = np.max(np.abs(y))
    if scale == 0:
        return np.array([], dtype=int)
    idx, _ = signal.find_peaks(y, prominence=rel_prominence * scale)
    return idx


def peak_fwhm(spec: Spectrum, index: int) -> float:
    """Full width at half maximum of the peak at ``index`` (linear interpolation)."""
    f, y = np.asarray(spec.frequency), np.asarray(spec.delta_rxx)
    half = y[index] / 2
    i = index
    while i > 0 and y[i] > half:
        i -= 1
    j = index
    while j < len(y) - 1 and y[j] > half:
        j += 1
    if y[i] > half or y[j] > half:
        raise ValueError("peak does not fall to half maximum inside the grid")
    left = np.interp(half, [y[i], y[i + 1]], [f[i], f[i + 1]])
    right = np.interp(half, [y[j], y[j - 1]], [f[j], f[j - 1]])
    return float(right - left)


# Rabi calibration ------------------------------------------------------------

def analytic_rabi_frequency(t: Transition, omega1: float) -> float:
    """Single-quantum Rabi frequency ``2 omega1 |<lo|Ix|hi>|`` in Hz."""
    if t.order != 1:
        raise ValueError("analytic rate only for single-quantum transitions")
    return 2 * omega1 * abs(_OPS.ix[t.lo, t.hi].real)


def transfer_probability(sys: SpinSystem, t: Transition, omega1: float, times, carrier: float | None = None) -> np.ndarray:
    """``|<hi|U(t)|lo>|^2`` for a resonant drive on ``t``."""
    fc = transition_frequency(sys, t) if carrier is None else carrier
    h = rotating_hamiltonian(sys, PhysicalPulse(fc, omega1))
    e, v = np.linalg.eigh(h)
    amp = v[t.hi, :] * np.conj(v[t.lo, :])
    ph = np.exp(-1j * np.multiply.outer(np.asarray(times, dtype=float), e))
    return np.abs(ph @ amp) ** 2


def calibrate_rabi_frequency(sys: SpinSystem, t: Transition, omega1: float, carrier: float | None = None) -> float:
    """Rabi frequency (Hz) from the first population-transfer maximum.

    The transfer probability is coarse-grained by dropping its Fourier
    components faster than three times the dominant dressed-state splitting,
    which removes the small fast micromotion of multi-quantum transitions. The
    first maximum reaching 90 % of the largest value inside the horizon
    ``10 / f_dominant`` is refined and converted with ``Omega = 1 / (2 t_max)``.
    """
    if not omega1 > 0:
        raise ValueError("omega1 must be positive")
    fc = transition_frequency(sys, t) if carrier is None else carrier
    h = rotating_hamiltonian(sys, PhysicalPulse(fc, omega1))
    e, v = np.linalg.eigh(h)
    amp = v[t.hi, :] * np.conj(v[t.lo, :])
    # P(t) = sum_jk c_jk exp(-i (e_j - e_k) t)
    c = np.outer(amp, np.conj(amp))
    de = e[:, None] - e[None, :]
    weight = np.abs(c) * (np.abs(de) > 1e-12 * max(1.0, np.abs(e).max()))
    if weight.max() < 1e-14:
        raise CalibrationError(f"no population transfer on {t} at omega1={omega1}")
    jk = np.unravel_index(np.argmax(weight), weight.shape)
    f_dom = abs(de[jk]) / TWO_PI
    keep = np.abs(de) <= 3 * TWO_PI * f_dom
    cs, des = c[keep], de[keep]

    def p_slow(tt):
        tt = np.atleast_1d(tt)
        return np.real(np.exp(-1j * np.multiply.outer(tt, des)) @ cs)

    horizon = 10.0 / f_dom
    grid = np.linspace(0.0, horizon, 20001)
    p = p_slow(grid)
    peaks, _ = signal.find_peaks(p, height=0.9 * p.max())
    if len(peaks) == 0:
        raise CalibrationError(f"no transfer maximum on {t} within {horizon:.3g} s")
    i = peaks[0]
    lo, hi = grid[i - 1], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda x: -p_slow(x)[0], bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12 * horizon})
    return 1.0 / (2.0 * res.x)


# Damped Rabi fit --------------------------------------------------------------

@dataclass(frozen=True)
class DampedRabiFit:
    amplitude: float
    omega_r: float  # rad/s
    t2: float
    residual: float

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "omega_r": self.omega_r, "t2": self.t2, "residual": self.residual}


def damped_rabi(t, amplitude, omega_r, t2):
    return amplitude * (1 - np.cos(omega_r * t) * np.exp(-t / t2))


def fit_damped_rabi(trace) -> DampedRabiFit:
    """Least-squares fit of ``A (1 - cos(Omega t) exp(-t/T2))``.

    Starting values come from the FFT peak (Omega) and a log-linear fit of the
    Hilbert envelope (T2). Accepts a :class:`TimeTrace` or a ``(t, y)`` pair.
    """
    if isinstance(trace, TimeTrace):
        t, y = np.asarray(trace.t_p, float), np.asarray(trace.delta_rxx, float)
    else:
        t, y = (np.asarray(a, float) for a in trace)
    if len(t) < 10:
        raise FitError("need at least 10 samples")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise FitError("sample times must be strictly increasing")
    # resample onto a uniform grid for the FFT guess
    tu = np.linspace(t[0], t[-1], len(t))
    yu = np.interp(tu, t, y)
    centred = yu - yu.mean()
    if np.std(centred) < 1e-12 * max(1.0, np.abs(yu).max()):
        raise FitError("no oscillation detected")
    power = np.abs(np.fft.rfft(centred * np.hanning(len(tu)))) ** 2
    freqs = np.fft.rfftfreq(len(tu), tu[1] - tu[0])
    k = int(np.argmax(power[1:])) + 1
    floor = np.median(power[1:])
    if power[k] < 10 * floor:
        raise FitError("no oscillation detected")
    if freqs[k] * (t[-1] - t[0]) < 1.0:
        raise FitError("trace spans less than one oscillation period")
    omega0 = TWO_PI * freqs[k]

    amp0 = float(np.mean(yu[len(yu) // 2:])) if abs(np.mean(yu)) > 0 else float(np.ptp(yu) / 2)
    env = np.abs(signal.hilbert(yu - amp0))
    sel = (env > 0.05 * env.max()) & (tu > tu[0] + 0.1 * (tu[-1] - tu[0])) & (tu < tu[-1] - 0.1 * (tu[-1] - tu[0]))
    t20 = tu[-1] - tu[0]
    if np.count_nonzero(sel) >= 3:
        slope = np.polyfit(tu[sel], np.log(env[sel]), 1)[0]
        if slope < 0:
            t20 = -1.0 / slope
    try:
        popt, _ = optimize.curve_fit(
            damped_rabi, t, y, p0=[amp0, omega0, t20],
            bounds=([-np.inf, 0.0, 1e-12], [np.inf, np.inf, np.inf]), maxfev=20000,
        )
    except RuntimeError as exc:
        raise FitError(str(exc)) from exc
    resid = float(np.sqrt(np.mean((damped_rabi(t, *popt) - y) ** 2)))
    return DampedRabiFit(float(popt[0]), float(popt[1]), float(popt[2]), resid)


# Dipole geometry -----------------------------------------------------------------

def dipole_coupling_factor(r, b0_dir=(1.0, 0.0, 0.0)) -> float:
    """Secular dipolar factor ``|r|^-3 (3 cos^2 theta - 1)`` in the units of ``r``^-3."""
    r = np.asarray(r, dtype=float)
    b = np.asarray(b0_dir, dtype=float)
    norm = np.linalg.norm(r)
    if norm == 0:
        raise ValueError("separation vector must be nonzero")
    if abs(np.linalg.norm(b) - 1) > 1e-9:
        raise ValueError("field direction must be a unit vector")
    cos = float(r @ b) / norm
    return (3 * cos**2 - 1) / norm**3


GAAS_LATTICE_NM = 0.565


def nearest_neighbour_bond(a: float = GAAS_LATTICE_NM) -> np.ndarray:
    """Zinc-blende nearest-neighbour vector ``(a/4)(1,1,1)``."""
    return a / 4 * np.ones(3)


MAGIC_ANGLE = math.acos(1 / math.sqrt(3))
