"""Chirped-drive (autoresonant) excitation of the quantum bouncer.

A particle bouncing on a mirror in a uniform gravitational field has the
Airy-function eigenstructure of the "quantum bouncer".  Shaking the mirror
sinusoidally with a slowly decreasing (chirped) frequency drags the particle
up its anharmonic level ladder one resonance at a time -- the quantum face of
classical autoresonance.  This package simulates that process end to end:

* ``units``       SI <-> scaled-unit conversions (a, T, E0, f0)
* ``airy``        in-repo Ai, Ai' evaluation with a stated accuracy budget
* ``eigenbasis``  Airy zeros, eigenenergies, dipole couplings
* ``drive``       chirp schedules, accumulated phase, trapping bound
* ``qdyn``        spectral propagator and quantum observables
* ``gridprop``    Crank-Nicolson real-space oracle
* ``classical``   action-angle reduction, pendulum analysis, exact bouncer
* ``wigner``      Wigner functions and phase-space diagnostics
* ``cli``         experiment runner (presets, CSV/JSON artifacts, verify)
"""

__version__ = "0.1.0"

from .airy import AiryPoint, airy_ai_aip, airy_eval
from .classical import (
    ActionAnglePoint,
    BouncerPoint,
    ResonanceWidth,
    bouncer_ensemble,
    matched_start,
    pendulum_rhs,
    resonance_width,
    simulate_bouncer,
    simulate_single_resonance,
)
from .drive import (
    ConstantSchedule,
    DriveProgram,
    LinearSchedule,
    OptimalChirp,
    omega_at,
    omega_dot_at,
    phase_at,
    time_at_omega,
    trapping_bound,
)
from .eigenbasis import EigenBasis, build_basis, eigenfunction, eigenfunction_matrix
from .errors import ConfigError, PropagationError, QBouncerError
from .gridprop import GridSpec, GridState, init_from_level, propagate_grid
from .qdyn import ObservableRecord, QuantumState, observables, propagate, pure_state, wavefunction_on_grid
from .units import PhysicalConstants, ScaledUnits, convert, derive_scales, to_scaled, to_si
from .wigner import WignerGrid, classical_overlay, wigner_transform

__all__ = [name for name in dir() if not name.startswith("_")]
