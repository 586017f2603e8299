"""Classical limit of the driven bouncer.

Three layers, from most reduced to exact:

* Resonance bookkeeping.  In action-angle variables the free bouncer has
  H0(I) = (3/2) b I^(2/3) and frequency Omega(I) = b I^(-1/3) with
  b = (pi^2/12)^(1/3).  The half-period orbit is
  x(I, theta) = (pi^2 - theta^2)/(4 Omega^2) for theta in [-pi, pi), whose
  first Fourier harmonic a_1 = Omega^(-2) is the only drive coupling kept in
  the single-resonance model.

* Single-resonance (Chirikov) dynamics of the action I and phase mismatch
  Phi, measured from the anti-phase point (Phi = theta - phi_d - pi):

      dI/dt   = +(eps/2) (w_d^2/Omega^2) sin Phi
      dPhi/dt = Omega - w_d - eps (Omega'/Omega^3) w_d^2 cos Phi

  The pi offset matters: with a soft oscillator (Omega' < 0) and a downward
  chirp, energy gain requires the bounce to lag the drive by about half a
  cycle, and the stable locked phase in these variables is Phi* = arcsin(q)
  with q = |dw_d/dt| / trapping_bound -- a small angle, so "phase locked"
  and "|Phi| stays below pi" coincide.  (Writing the same dynamics in the
  raw difference theta - phi_d shifts the lock to -pi + arcsin(q) and makes
  the bounded-phase test useless; the pendulum equation of `pendulum_rhs`
  is consistent with the convention used here.)

  A run counts as phase-locked ("trapped") if the unwrapped |Phi| stays
  below pi for its whole duration.  Expanding around the locked action gives
  a pendulum equation for Phi whose oscillation width is the resonance width
  Delta I_max ~ 5 sqrt(eps) Ibar^(2/3); since the scaled action of level n is
  ~ n, the same number estimates how many quantum levels take part.

* The exact bouncer x'' = -1/2 + eps w_d^2(t) cos(phi_d(t)) with elastic
  reflection at x = 0.  Integration is fixed-step RK4; the RK4 dense output
  inside a step is an exact polynomial in the substep time (the force does
  not depend on x or p), so wall crossings are located by root-finding on
  that polynomial and the bounce applied at the refined instant.

Ensemble runs use a fixed action and angles placed deterministically at the
midpoints of a uniform partition of [-pi, pi); no random numbers anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .drive import B_CUBED, DriveProgram, omega_at, phase_at, trapping_bound
from .errors import PropagationError

__all__ = [
    "B_ACTION",
    "ActionAnglePoint",
    "BouncerPoint",
    "ResonanceWidth",
    "SingleResonanceResult",
    "BouncerResult",
    "EnsembleResult",
    "omega_of_action",
    "action_of_frequency",
    "h0_of_action",
    "action_of_energy",
    "h0_to_omega",
    "orbit_position",
    "orbit_momentum",
    "matched_start",
    "pendulum_rhs",
    "resonance_width",
    "simulate_single_resonance",
    "simulate_bouncer",
    "bouncer_ensemble",
]

#: b = (pi^2/12)^(1/3)
B_ACTION = B_CUBED ** (1.0 / 3.0)

_MIN_ACTION = 1e-9
_MAX_EVENTS_PER_STEP = 8


@dataclass(frozen=True)
class ActionAnglePoint:
    """Reduced state: action, unwrapped phase mismatch, time."""

    action: float
    phase_mismatch: float = 0.0
    t: float = 0.0

    def __post_init__(self) -> None:
        if not self.action > 0.0:
            raise ValueError("action must be positive")


@dataclass(frozen=True)
class BouncerPoint:
    """Full state of the bouncer in the co-moving frame."""

    x: float
    p: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.x < 0.0:
            raise ValueError("position must be non-negative")


def omega_of_action(action) -> np.ndarray:
    """Bounce frequency Omega(I) = b I^(-1/3)."""
    return B_ACTION * np.asarray(action, dtype=float) ** (-1.0 / 3.0)


def action_of_frequency(omega: float) -> float:
    """Action whose bounce frequency equals omega: I = (b/omega)^3."""
    if not omega > 0.0:
        raise ValueError("omega must be positive")
    return (B_ACTION / omega) ** 3


def h0_of_action(action) -> np.ndarray:
    """Unperturbed energy H0(I) = (3/2) b I^(2/3)."""
    return 1.5 * B_ACTION * np.asarray(action, dtype=float) ** (2.0 / 3.0)


def action_of_energy(h0: float) -> float:
    """Inverse of h0_of_action."""
    if not h0 > 0.0:
        raise ValueError("energy must be positive")
    return (2.0 * h0 / (3.0 * B_ACTION)) ** 1.5


def h0_to_omega(h0) -> np.ndarray:
    """Bounce frequency of an orbit with energy H0: Omega = pi/sqrt(8 H0)."""
    return np.pi / np.sqrt(8.0 * np.asarray(h0, dtype=float))


def orbit_position(action: float, theta) -> np.ndarray:
    """Half-period orbit x(I, theta) = (pi^2 - theta^2)/(4 Omega^2), even in theta."""
    omega = float(omega_of_action(action))
    th = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return (np.pi**2 - th**2) / (4.0 * omega**2)


def orbit_momentum(action: float, theta) -> np.ndarray:
    """Momentum along the orbit, p = -theta/(2 Omega) for theta in [-pi, pi)."""
    omega = float(omega_of_action(action))
    th = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return -th / (2.0 * omega)


# ---------------------------------------------------------------------------
# Pendulum reduction and resonance width.


def pendulum_rhs(epsilon: float, omega_d: float, omega_dot: float, i_bar: float, phi: float) -> float:
    """Phase-mismatch acceleration of the pendulum reduction.

    Returns (eps/2) Omega'(Ibar) (w_d^2/Omega^2(Ibar)) sin(phi) - dw_d/dt,
    with Ibar normally chosen so that Omega(Ibar) = w_d.  A stable locked
    equilibrium exists iff |dw_d/dt| < trapping_bound(eps, w_d).
    """
    if not i_bar > 0.0:
        raise ValueError("i_bar must be positive")
    omega_i = float(omega_of_action(i_bar))
    omega_prime = -(B_ACTION / 3.0) * i_bar ** (-4.0 / 3.0)
    return 0.5 * epsilon * omega_prime * (omega_d**2 / omega_i**2) * math.sin(phi) - omega_dot


@dataclass(frozen=True)
class ResonanceWidth:
    """Pendulum-bucket width of the resonance at a given drive frequency."""

    i_bar: float           # locked action, (b/w_d)^3
    delta_i_max: float     # 5 sqrt(eps) Ibar^(2/3) (rounded prefactor)
    delta_i_exact: float   # same with prefactor sqrt(24/b) ~ 5.06
    delta_n: float         # levels involved; equals delta_i_max since I ~ n
    mean_level: float      # WKB estimate Ibar + 1/4 of the occupied level


def resonance_width(epsilon: float, omega_d: float) -> ResonanceWidth:
    """Resonance width and the equivalent number of quantum levels."""
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    if not omega_d > 0.0:
        raise ValueError("omega_d must be positive")
    i_bar = action_of_frequency(omega_d)
    width = 5.0 * math.sqrt(epsilon) * i_bar ** (2.0 / 3.0)
    exact = math.sqrt(24.0 / B_ACTION * epsilon) * i_bar ** (2.0 / 3.0)
    return ResonanceWidth(
        i_bar=i_bar,
        delta_i_max=width,
        delta_i_exact=exact,
        delta_n=width,
        mean_level=i_bar + 0.25,
    )


# ---------------------------------------------------------------------------
# Single-resonance dynamics.


def matched_start(epsilon: float, program: DriveProgram) -> ActionAnglePoint:
    """Initial point matched to the drive: resonant action, locked phase.

    The action is I0 = (b/w_d(0))^3 so that Omega(I0) = w_d(0); the phase
    mismatch is the locked equilibrium arcsin(|dw_d/dt| / bound) of the
    pendulum reduction when the trapping condition holds at t = 0 (pi/2 when
    it is violated, since no equilibrium exists; 0 for an undriven program).
    """
    from .drive import omega_dot_at  # local import to keep module load light

    omega0 = float(omega_at(program, 0.0))
    action = action_of_frequency(omega0)
    if program.epsilon <= 0.0 or epsilon <= 0.0:
        return ActionAnglePoint(action=action, phase_mismatch=0.0)
    q_eff = abs(float(omega_dot_at(program, 0.0))) / trapping_bound(epsilon, omega0)
    return ActionAnglePoint(action=action, phase_mismatch=math.asin(min(q_eff, 1.0)))


@dataclass
class SingleResonanceResult:
    ts: np.ndarray
    actions: np.ndarray
    phases: np.ndarray          # unwrapped phase mismatch
    omegas_drive: np.ndarray
    omegas_bounce: np.ndarray   # Omega(I(t))
    trapped: bool
    max_abs_phase: float


def simulate_single_resonance(
    epsilon: float,
    program: DriveProgram,
    initial: ActionAnglePoint,
    dt: float = 5e-3,
    sample_every: int = 20,
    keep_cos_term: bool = True,
) -> SingleResonanceResult:
    """Integrate the reduced (I, Phi) equations with fixed-step RK4.

    `keep_cos_term=False` drops the cos(Phi) frequency-shift term, which
    reproduces the plain pendulum reduction.  The run is "trapped" when the
    unwrapped |Phi| never reaches pi.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    n_steps = int(round(program.t_final / dt))
    if n_steps < 1:
        raise ValueError("t_final shorter than one step")
    lattice = np.minimum(0.5 * dt * np.arange(2 * n_steps + 1), program.t_final)
    w_lattice = np.asarray(omega_at(program, lattice), dtype=float)

    b = B_ACTION
    third = 1.0 / 3.0
    cos_switch = 1.0 if keep_cos_term else 0.0

    def rhs(i_val: float, phi: float, w: float) -> tuple[float, float]:
        if i_val < _MIN_ACTION:
            raise PropagationError(
                f"action collapsed to {i_val:.3e}; bounce frequency blew up"
            )
        om = b * i_val ** (-third)
        ratio = (w / om) ** 2
        di = 0.5 * epsilon * ratio * math.sin(phi)
        # the cos term is + eps (|Omega'|/Omega^3) w^2 cos(Phi) since Omega' < 0
        dphi = om - w + cos_switch * epsilon * w**2 * i_val ** (-third) / (3.0 * b**2) * math.cos(phi)
        return di, dphi

    i_val = initial.action
    phi = initial.phase_mismatch
    n_samples = n_steps // sample_every + 2
    ts = np.empty(n_samples)
    actions = np.empty(n_samples)
    phases = np.empty(n_samples)
    omegas = np.empty(n_samples)
    count = 0

    def record(step: int) -> None:
        nonlocal count
        ts[count] = step * dt
        actions[count] = i_val
        phases[count] = phi
        omegas[count] = w_lattice[2 * step]
        count += 1

    record(0)
    max_phi = abs(phi)
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        w0 = w_lattice[2 * step]
        wh = w_lattice[2 * step + 1]
        w1 = w_lattice[2 * step + 2]
        k1i, k1p = rhs(i_val, phi, w0)
        k2i, k2p = rhs(i_val + half * k1i, phi + half * k1p, wh)
        k3i, k3p = rhs(i_val + half * k2i, phi + half * k2p, wh)
        k4i, k4p = rhs(i_val + dt * k3i, phi + dt * k3p, w1)
        i_val += sixth * (k1i + 2.0 * (k2i + k3i) + k4i)
        phi += sixth * (k1p + 2.0 * (k2p + k3p) + k4p)
        if abs(phi) > max_phi:
            max_phi = abs(phi)
        done = step + 1
        if done % sample_every == 0 or done == n_steps:
            record(done)

    ts = ts[:count]
    actions = actions[:count]
    phases = phases[:count]
    omegas = omegas[:count]
    return SingleResonanceResult(
        ts=ts,
        actions=actions,
        phases=phases,
        omegas_drive=omegas,
        omegas_bounce=np.asarray(omega_of_action(actions)),
        trapped=bool(max_phi < math.pi),
        max_abs_phase=float(max_phi),
    )


# ---------------------------------------------------------------------------
# Exact bouncer with event-detected elastic reflections.


@dataclass
class BouncerResult:
    ts: np.ndarray
    xs: np.ndarray
    ps: np.ndarray
    h0: np.ndarray
    bounce_times: list[float]

    @property
    def n_bounces(self) -> int:
        return len(self.bounce_times)


@dataclass
class EnsembleResult:
    ts: np.ndarray
    h0_mean: np.ndarray
    h0_std: np.ndarray
    omegas_drive: np.ndarray
    n_particles: int
    bounce_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def _force_scalar(program: DriveProgram, epsilon: float, t: float) -> float:
    t = min(t, program.t_final)
    w = float(omega_at(program, t))
    return -0.5 + epsilon * w**2 * math.cos(float(phase_at(program, t)))


def _step_with_bounces(
    x: np.ndarray,
    p: np.ndarray,
    t0: float,
    h: float,
    f0: float,
    fh: float,
    f1: float,
    program: DriveProgram,
    epsilon: float,
    bounce_log: list[list[float]] | None,
    counts: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """One RK4 step for all particles, splitting at wall crossings."""
    x_new = x + h * p + h * h * (f0 + 2.0 * fh) / 6.0
    p_new = p + h * (f0 + 4.0 * fh + f1) / 6.0
    crossed = x_new < 0.0
    if not np.any(crossed):
        return x_new, p_new
    for j in np.nonzero(crossed)[0]:
        xj, pj = float(x[j]), float(p[j])
        tj, hj = t0, h
        f0j, fhj, f1j = f0, fh, f1
        for _ in range(_MAX_EVENTS_PER_STEP):
            aj = -3.0 * f0j + 4.0 * fhj - f1j
            bj = 2.0 * (f0j - 2.0 * fhj + f1j)

            def x_of(s: float) -> float:
                return xj + hj * pj * s + hj * hj * (
                    f0j * s * s / 2.0 + aj * s**3 / 6.0 + bj * s**4 / 12.0
                )

            x_end = x_of(1.0)
            if x_end >= 0.0:
                xj = x_end
                pj = pj + hj * (f0j + 4.0 * fhj + f1j) / 6.0
                break
            lo = 1e-14 if xj == 0.0 else 0.0
            if x_of(lo) <= 0.0:
                raise PropagationError(
                    f"bounce cascade at t = {tj:.6g}: particle pinned at the wall"
                )
            s_star = brentq(x_of, lo, 1.0, xtol=1e-13, rtol=8.9e-16)
            p_star = pj + hj * (f0j * s_star + aj * s_star**2 / 2.0 + bj * s_star**3 / 3.0)
            t_star = tj + hj * s_star
            if bounce_log is not None:
                bounce_log[j].append(t_star)
            counts[j] += 1
            xj = 0.0
            pj = -p_star
            hj = hj * (1.0 - s_star)
            tj = t_star
            if hj <= 0.0:
                break
            f0j = _force_scalar(program, epsilon, tj)
            fhj = _force_scalar(program, epsilon, tj + hj / 2.0)
            f1j = _force_scalar(program, epsilon, tj + hj)
        else:
            raise PropagationError(f"more than {_MAX_EVENTS_PER_STEP} bounces in one step at t = {t0:.6g}")
        x_new[j] = xj
        p_new[j] = pj
    return x_new, p_new


def _propagate_bouncer(
    program: DriveProgram,
    epsilon: float,
    x0: np.ndarray,
    p0: np.ndarray,
    dt: float,
    t_end: float,
    sample_every: int,
    log_bounces: bool,
):
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end shorter than one step")
    lattice = np.minimum(0.5 * dt * np.arange(2 * n_steps + 1), program.t_final)
    force = -0.5 + epsilon * np.asarray(omega_at(program, lattice)) ** 2 * np.cos(
        np.asarray(phase_at(program, lattice))
    )
    x = np.asarray(x0, dtype=float).copy()
    p = np.asarray(p0, dtype=float).copy()
    if np.any(x < 0.0):
        raise ValueError("initial positions must be non-negative")
    counts = np.zeros(len(x), dtype=int)
    bounce_log: list[list[float]] | None = [[] for _ in x] if log_bounces else None

    sample_steps = [0]
    xs_hist = [x.copy()]
    ps_hist = [p.copy()]
    for step in range(n_steps):
        x, p = _step_with_bounces(
            x,
            p,
            step * dt,
            dt,
            float(force[2 * step]),
            float(force[2 * step + 1]),
            float(force[2 * step + 2]),
            program,
            epsilon,
            bounce_log,
            counts,
        )
        done = step + 1
        if done % sample_every == 0 or done == n_steps:
            sample_steps.append(done)
            xs_hist.append(x.copy())
            ps_hist.append(p.copy())

    ts = dt * np.asarray(sample_steps, dtype=float)
    return ts, np.asarray(xs_hist), np.asarray(ps_hist), counts, bounce_log


def simulate_bouncer(
    epsilon: float,
    program: DriveProgram,
    initial: BouncerPoint,
    dt: float = 1e-3,
    sample_every: int = 100,
    t_end: float | None = None,
) -> BouncerResult:
    """Trajectory of one bouncer with elastic wall reflections."""
    ts, xs, ps, _, bounce_log = _propagate_bouncer(
        program,
        epsilon,
        np.array([initial.x]),
        np.array([initial.p]),
        dt,
        program.t_final if t_end is None else t_end,
        sample_every,
        log_bounces=True,
    )
    x_t = xs[:, 0]
    p_t = ps[:, 0]
    return BouncerResult(
        ts=ts,
        xs=x_t,
        ps=p_t,
        h0=p_t**2 / 2.0 + x_t / 2.0,
        bounce_times=bounce_log[0],
    )


def bouncer_ensemble(
    epsilon: float,
    program: DriveProgram,
    initial_action: float,
    n_particles: int = 100,
    dt: float = 1e-3,
    sample_every: int = 100,
    t_end: float | None = None,
) -> EnsembleResult:
    """Ensemble at fixed action, angles at midpoints of a uniform partition."""
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    thetas = -np.pi + 2.0 * np.pi * (np.arange(n_particles) + 0.5) / n_particles
    x0 = np.asarray(orbit_position(initial_action, thetas))
    p0 = np.asarray(orbit_momentum(initial_action, thetas))
    ts, xs, ps, counts, _ = _propagate_bouncer(
        program,
        epsilon,
        x0,
        p0,
        dt,
        program.t_final if t_end is None else t_end,
        sample_every,
        log_bounces=False,
    )
    h0 = ps**2 / 2.0 + xs / 2.0
    t_clamped = np.minimum(ts, program.t_final)
    return EnsembleResult(
        ts=ts,
        h0_mean=h0.mean(axis=1),
        h0_std=h0.std(axis=1),
        omegas_drive=np.asarray(omega_at(program, t_clamped)),
        n_particles=n_particles,
        bounce_counts=counts,
    )
