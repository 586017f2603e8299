"""Chirped drive programs: frequency schedules, accumulated phase, trapping bound.

A drive program is an amplitude eps plus a frequency schedule w_d(t).  The
mirror position in the lab frame is L(t) = eps * cos(phi_d(t)) in scaled
units, with phi_d the accumulated phase; in the co-moving frame the drive
enters the Hamiltonian as the force term -eps * w_d(t)^2 * x * cos(phi_d).

Three schedules are supported:

* constant        w_d(t) = w0
* linear          w_d(t) = w0 + rate * t
* optimal-chirp   1/w_d(t)^3 = 1/w0^3 + q * eps * t / (2 b^3),  b^3 = pi^2/12

The optimal chirp keeps |dw_d/dt| pinned at the fraction q of the autoresonant
trapping bound eps * w_d^4 / (6 b^3) at every instant; q < 1 maintains phase
locking, while q >= 1 is allowed for deliberate detrapping runs.  All phase
integrals have closed forms; no quadrature is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "B_CUBED",
    "ConstantSchedule",
    "LinearSchedule",
    "OptimalChirp",
    "DriveProgram",
    "omega_at",
    "phase_at",
    "omega_dot_at",
    "trapping_bound",
    "time_at_omega",
    "schedule_from_dict",
    "schedule_to_dict",
]

#: b^3 with b = (pi^2/12)^(1/3), the action-frequency constant of the bouncer.
B_CUBED = math.pi**2 / 12.0


@dataclass(frozen=True)
class ConstantSchedule:
    omega0: float

    def __post_init__(self) -> None:
        if not self.omega0 > 0.0:
            raise ValueError("omega0 must be positive")


@dataclass(frozen=True)
class LinearSchedule:
    omega0: float
    rate: float

    def __post_init__(self) -> None:
        if not self.omega0 > 0.0:
            raise ValueError("omega0 must be positive")


@dataclass(frozen=True)
class OptimalChirp:
    omega0: float
    q: float

    def __post_init__(self) -> None:
        if not self.omega0 > 0.0:
            raise ValueError("omega0 must be positive")
        if not self.q > 0.0:
            raise ValueError("safety factor q must be positive")


Schedule = Union[ConstantSchedule, LinearSchedule, OptimalChirp]


@dataclass(frozen=True)
class DriveProgram:
    """Drive amplitude, frequency schedule and run length (all scaled)."""

    epsilon: float
    schedule: Schedule
    t_final: float

    def __post_init__(self) -> None:
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be non-negative")
        if not self.t_final > 0.0:
            raise ValueError("t_final must be positive")

    @property
    def chirp_slope(self) -> float:
        """d(w^-3)/dt for the optimal chirp; 0 for other schedules."""
        if isinstance(self.schedule, OptimalChirp):
            return self.schedule.q * self.epsilon / (2.0 * B_CUBED)
        return 0.0


def _check_time(program: DriveProgram, t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > program.t_final * (1.0 + 1e-12) + 1e-12):
        raise ValueError(f"time outside [0, t_final={program.t_final}]")
    return arr


def omega_at(program: DriveProgram, t):
    """Instantaneous drive frequency w_d(t) (vectorized)."""
    arr = _check_time(program, t)
    sched = program.schedule
    if isinstance(sched, ConstantSchedule):
        out = np.full_like(arr, sched.omega0)
    elif isinstance(sched, LinearSchedule):
        out = sched.omega0 + sched.rate * arr
        if np.any(out <= 0.0):
            raise ValueError("linear schedule reaches non-positive frequency")
    else:
        out = (sched.omega0**-3 + program.chirp_slope * arr) ** (-1.0 / 3.0)
    return out if np.asarray(t).shape else float(out)


def omega_dot_at(program: DriveProgram, t):
    """Instantaneous chirp rate dw_d/dt (vectorized)."""
    arr = _check_time(program, t)
    sched = program.schedule
    if isinstance(sched, ConstantSchedule):
        out = np.zeros_like(arr)
    elif isinstance(sched, LinearSchedule):
        out = np.full_like(arr, sched.rate)
    else:
        w = (sched.omega0**-3 + program.chirp_slope * arr) ** (-1.0 / 3.0)
        out = -(program.chirp_slope / 3.0) * w**4
    return out if np.asarray(t).shape else float(out)


def phase_at(program: DriveProgram, t):
    """Accumulated phase phi_d(t) = integral of w_d, by closed form."""
    arr = _check_time(program, t)
    sched = program.schedule
    if isinstance(sched, ConstantSchedule):
        out = sched.omega0 * arr
    elif isinstance(sched, LinearSchedule):
        out = sched.omega0 * arr + 0.5 * sched.rate * arr**2
    else:
        slope = program.chirp_slope
        if slope == 0.0:  # eps = 0 degenerates to a constant schedule
            out = sched.omega0 * arr
        else:
            # phi = (3 A^(2/3) / (2 B)) * ((1 + B t / A)^(2/3) - 1), A = w0^-3;
            # expm1/log1p keeps the small-chirp limit accurate.
            inv_a = sched.omega0**3
            u = slope * arr * inv_a
            out = 1.5 / (slope * sched.omega0**2) * np.expm1((2.0 / 3.0) * np.log1p(u))
    return out if np.asarray(t).shape else float(out)


def trapping_bound(epsilon: float, omega: float) -> float:
    """Autoresonant trapping bound eps * w^4 / (6 b^3) on |dw_d/dt|.

    A schedule keeps a stable phase-locked equilibrium at time t iff
    |dw_d/dt| is below this bound evaluated at (eps, w_d(t)).
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    if not omega > 0.0:
        raise ValueError("omega must be positive")
    return epsilon * omega**4 / (6.0 * B_CUBED)


def time_at_omega(program: DriveProgram, omega: float) -> float:
    """Invert the schedule: the time at which w_d(t) = omega.

    Raises ``ValueError`` if the frequency is never reached inside
    [0, t_final].
    """
    if not omega > 0.0:
        raise ValueError("omega must be positive")
    sched = program.schedule
    if isinstance(sched, ConstantSchedule):
        if math.isclose(omega, sched.omega0, rel_tol=1e-12):
            return 0.0
        raise ValueError("constant schedule never reaches the requested frequency")
    if isinstance(sched, LinearSchedule):
        if sched.rate == 0.0:
            if math.isclose(omega, sched.omega0, rel_tol=1e-12):
                return 0.0
            raise ValueError("zero-rate schedule never reaches the requested frequency")
        t = (omega - sched.omega0) / sched.rate
    else:
        slope = program.chirp_slope
        if slope == 0.0:
            if math.isclose(omega, sched.omega0, rel_tol=1e-12):
                return 0.0
            raise ValueError("chirp with eps = 0 never leaves the initial frequency")
        t = (omega**-3 - sched.omega0**-3) / slope
    if t < -1e-12 or t > program.t_final * (1.0 + 1e-12):
        raise ValueError(
            f"frequency {omega} reached at t = {t:.6g}, outside [0, {program.t_final}]"
        )
    return max(t, 0.0)


def schedule_to_dict(schedule: Schedule) -> dict:
    """JSON-friendly tagged representation of a schedule."""
    if isinstance(schedule, ConstantSchedule):
        return {"type": "constant", "omega0": schedule.omega0}
    if isinstance(schedule, LinearSchedule):
        return {"type": "linear", "omega0": schedule.omega0, "rate": schedule.rate}
    return {"type": "optimal-chirp", "omega0": schedule.omega0, "q": schedule.q}


def schedule_from_dict(data: dict) -> Schedule:
    """Parse the tagged-union schedule representation used in config files."""
    if not isinstance(data, dict) or "type" not in data:
        raise ValueError("schedule must be an object with a 'type' tag")
    kind = data["type"]
    try:
        if kind == "constant":
            return ConstantSchedule(omega0=float(data["omega0"]))
        if kind == "linear":
            return LinearSchedule(omega0=float(data["omega0"]), rate=float(data["rate"]))
        if kind == "optimal-chirp":
            return OptimalChirp(omega0=float(data["omega0"]), q=float(data["q"]))
    except KeyError as exc:
        raise ValueError(f"schedule {kind!r} missing field {exc}") from exc
    raise ValueError(f"unknown schedule type {kind!r}")
