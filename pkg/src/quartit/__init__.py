"""Two logical qubits in one spin-3/2 nucleus.

Modules
-------
spin          basis, selective rotations, phase-insensitive comparison
gates         logical gates as selective-pulse sequences and their checks
system        nuclide parameters and config files
dsl           the pulse-program language
compiler      programs to timed r.f. schedules
dynamics      rotating-frame propagation, traces, spectra, fits
tomography    Mz-detected state reconstruction
state_prep    pseudopure states from a polarized start
"""
from .compiler import CompileOptions, PulseSchedule, compile_program, degenerate_drive_search, rabi_frequency
from .dsl import GateProgram, ParseError, parse_program, render
from .gates import IdealPulse, compose, pulse, verify_identities
from .spin import ALL_TRANSITIONS, Transition, equal_up_to_phase, selective_rotation
from .system import PhysicalPulse, SpinSystem, parse_config, profile, transition_frequency

__all__ = [
    "ALL_TRANSITIONS", "CompileOptions", "GateProgram", "IdealPulse", "ParseError", "PhysicalPulse",
    "PulseSchedule", "SpinSystem", "Transition", "compile_program", "compose", "degenerate_drive_search",
    "equal_up_to_phase", "parse_config", "parse_program", "profile", "pulse", "rabi_frequency", "render",
    "selective_rotation", "transition_frequency", "verify_identities",
]
