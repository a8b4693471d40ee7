"""Nuclide parameters and the ``key = value`` config format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .spin import Transition


@dataclass(frozen=True)
class SpinSystem:
    """Parameters of one I = 3/2 nuclide.

    Attributes
    ----------
    f0 : float
        Larmor frequency in Hz.
    dq : float
        Quadrupole shift in Hz; adjacent single-quantum lines sit ``2*dq`` apart.
    knight_shift : float
        Resonance shift in Hz, added only while ``electrons_present``.
    t1, t2 : float
        Population relaxation and coherence decay times in seconds.
    kappa : float
        Readout gain, ohm per hbar of Mz.
    pol_step : float
        Population increment ``d`` between adjacent levels after dynamic
        polarization.
    """

    nuclide: str = "generic"
    f0: float = 1.0e6
    dq: float = 7.5e3
    knight_shift: float = 0.0
    electrons_present: bool = False
    t1: float = float("inf")
    t2: float = float("inf")
    kappa: float = 1.0
    pol_step: float = 0.1

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError("f0 must be positive")
        if not self.dq >= 0:
            raise ValueError("dq must be non-negative")
        if not (self.t2 > 0 and self.t1 >= self.t2):
            raise ValueError("need t1 >= t2 > 0")
        if not 0 <= self.pol_step <= 1 / 6:
            raise ValueError("pol_step must lie in [0, 1/6]")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    @property
    def larmor(self) -> float:
        """Effective Larmor frequency including the Knight shift when it applies."""
        return self.f0 + (self.knight_shift if self.electrons_present else 0.0)

    def replace(self, **changes) -> "SpinSystem":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k in ("t1", "t2"):
            if d[k] == float("inf"):
                d[k] = "inf"
        return d


# q(m) for levels 0..3, i.e. m = 3/2, 1/2, -1/2, -3/2
QUAD_PATTERN = (1.0, -1.0, -1.0, 1.0)
M_VALUES = (1.5, 0.5, -0.5, -1.5)


def level_energy(sys: SpinSystem, k: int) -> float:
    """Level energy divided by h, in Hz: ``-f0*m + dq*q(m)``."""
    return -sys.larmor * M_VALUES[k] + sys.dq * QUAD_PATTERN[k]


def transition_frequency(sys: SpinSystem, t: Transition) -> float:
    """Per-photon resonance frequency of a transition in Hz."""
    gap = level_energy(sys, t.hi) - level_energy(sys, t.lo)
    return gap / t.order


# 2*dq = 15 kHz observed splitting for 69Ga; f0 values are placeholders to be
# overridden with the actual field-dependent Larmor frequency.
_PROFILES = {
    "69Ga": dict(f0=60.0e6, dq=7.5e3),
    "71Ga": dict(f0=78.0e6, dq=7.5e3),
    "75As": dict(f0=40.0e6, dq=7.5e3),
}
_ALIASES = {"ga69": "69Ga", "ga71": "71Ga", "as75": "75As"}

KNIGHT_SHIFT_HZ = 9.0e3
T2_COUPLED_S = 0.6e-3
T2_DECOUPLED_S = 1.5e-3
T1_S = 100.0


def profile(name: str, decoupled: bool = False, **overrides) -> SpinSystem:
    """Bundled nuclide profile.

    Without decoupling the conduction electrons stay in the channel: the
    Knight shift applies and T2 = 0.6 ms. With decoupling T2 = 1.5 ms.
    """
    key = _ALIASES.get(name.lower(), name)
    if key not in _PROFILES:
        raise KeyError(f"unknown nuclide profile {name!r}; known: {sorted(_PROFILES)}")
    params = dict(
        nuclide=key,
        knight_shift=KNIGHT_SHIFT_HZ,
        electrons_present=not decoupled,
        t1=T1_S,
        t2=T2_DECOUPLED_S if decoupled else T2_COUPLED_S,
        **_PROFILES[key],
    )
    params.update(overrides)
    return SpinSystem(**params)


CONFIG_KEYS = {
    "nuclide": ("nuclide", str),
    "f0_hz": ("f0", float),
    "dq_hz": ("dq", float),
    "t1_s": ("t1", float),
    "t2_s": ("t2", float),
    "knight_hz": ("knight_shift", float),
    "electrons_present": ("electrons_present", None),
    "kappa": ("kappa", float),
    "pol_step_d": ("pol_step", float),
}


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str, base: SpinSystem | None = None) -> SpinSystem:
    """Parse ``key = value`` lines (``#`` comments allowed) into a SpinSystem.

    A ``profile = 69Ga`` line (optionally with ``decoupled = true``) selects a
    bundled profile as the starting point; other keys override it.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS and key not in ("profile", "decoupled"):
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = val

    try:
        if "profile" in values:
            decoupled = _parse_bool(values.get("decoupled", "false"))
            sys = profile(values["profile"], decoupled=decoupled)
        else:
            sys = base or SpinSystem()
        changes = {}
        for key, val in values.items():
            if key in ("profile", "decoupled"):
                continue
            field, conv = CONFIG_KEYS[key]
            changes[field] = _parse_bool(val) if conv is None else conv(val)
        return sys.replace(**changes)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def render_config(sys: SpinSystem) -> str:
    lines = []
    for key, (field, _) in CONFIG_KEYS.items():
        val = getattr(sys, field)
        if isinstance(val, bool):
            val = "true" if val else "false"
        lines.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PhysicalPulse:
    """Rectangular r.f. pulse: carrier and Rabi amplitude (omega1/2pi) in Hz, phase in rad."""

    carrier: float
    rabi_amplitude: float
    phase: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.rabi_amplitude < 0:
            raise ValueError("rabi amplitude must be non-negative")
