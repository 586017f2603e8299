"""Real-space Crank-Nicolson propagator, used as an oracle for the spectral path.

The driven Hamiltonian is discretized on a uniform grid over [0, x_max] with
Dirichlet walls at both ends (the far wall simply has to sit well beyond every
classically allowed region).  Each step applies the Cayley form

    (1 + i dt/2 H(t+dt/2)) psi_new = (1 - i dt/2 H(t+dt/2)) psi_old

with the potential evaluated at the half step, so the update is unitary by
construction regardless of dt and the discrete norm is conserved to roundoff.
Occupation probabilities are obtained by grid inner products with the sampled
eigenfunctions.  This solver is deliberately plain: it shares no code with the
spectral propagator beyond the eigenfunctions used for initialization and
projection, which is what makes the occupation cross-check meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .drive import DriveProgram, omega_at, phase_at
from .eigenbasis import EigenBasis, eigenfunction_matrix
from .errors import ConfigError, PropagationError
from .qdyn import ObservableRecord

__all__ = ["GridSpec", "GridState", "GridResult", "init_from_level", "propagate_grid"]

NORM_ABORT = 1e-6
TAIL_ABORT = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Uniform real-space grid and time step for the implicit propagator."""

    x_max: float = 80.0
    n_points: int = 4096
    dt: float = 5e-4

    def __post_init__(self) -> None:
        if not self.x_max > 0.0:
            raise ConfigError("x_max must be positive")
        if self.n_points < 16:
            raise ConfigError("n_points must be at least 16")
        if not self.dt > 0.0:
            raise ConfigError("dt must be positive")

    @property
    def dx(self) -> float:
        return self.x_max / (self.n_points - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.n_points)


@dataclass(frozen=True)
class GridState:
    """Wavefunction samples on the grid (boundary values pinned to zero)."""

    t: float
    psi: np.ndarray

    def norm(self, spec: GridSpec) -> float:
        return float(np.sqrt(spec.dx * np.sum(np.abs(self.psi) ** 2)))


@dataclass
class GridResult:
    records: list[ObservableRecord]
    final_state: GridState
    norm_drift: float = 0.0
    max_tail_fraction: float = 0.0
    occupation_history: list[np.ndarray] = field(default_factory=list)


def _sampled_modes(basis: EigenBasis, spec: GridSpec) -> np.ndarray:
    """Eigenfunctions sampled on the grid and renormalized discretely."""
    modes = eigenfunction_matrix(basis, spec.xs)
    norms = np.sqrt(spec.dx * np.sum(modes**2, axis=1))
    return modes / norms[:, None]


def init_from_level(basis: EigenBasis, n: int, spec: GridSpec) -> GridState:
    """Grid projection of eigenstate n, renormalized on the grid."""
    if not 1 <= n <= basis.n_levels:
        raise ValueError(f"level index {n} outside [1, {basis.n_levels}]")
    turning = float(np.abs(basis.zeros[n - 1]))
    if turning >= spec.x_max / 2.0:
        raise ConfigError(
            f"turning point {turning:.2f} of level {n} too close to x_max = {spec.x_max}"
        )
    psi = _sampled_modes(basis, spec)[n - 1].astype(complex)
    psi[0] = 0.0
    psi[-1] = 0.0
    psi /= np.sqrt(spec.dx * np.sum(np.abs(psi) ** 2))
    return GridState(t=0.0, psi=psi)


def _grid_record(
    basis: EigenBasis,
    modes: np.ndarray,
    spec: GridSpec,
    t: float,
    omega_d: float,
    psi: np.ndarray,
) -> ObservableRecord:
    amps = spec.dx * (modes @ psi)
    p = np.abs(amps) ** 2
    n = np.arange(1, basis.n_levels + 1)
    mean_n = float(np.dot(n, p))
    var = float(np.dot(n.astype(float) ** 2, p)) - mean_n**2
    return ObservableRecord(
        t=t,
        omega_d=omega_d,
        occupations=p,
        mean_n=mean_n,
        delta_n=float(np.sqrt(max(var, 0.0))),
        mean_energy=float(np.dot(basis.energies, p)),
    )


def propagate_grid(
    state: GridState,
    program: DriveProgram,
    spec: GridSpec,
    t_end: float | None = None,
    basis: EigenBasis | None = None,
    sample_every: int = 200,
) -> GridResult:
    """Crank-Nicolson propagation from `state` to `t_end` (default t_final).

    When `basis` is given, occupation projections are recorded every
    `sample_every` steps in the same layout the spectral solver produces.

    Raises
    ------
    PropagationError
        If the discrete norm drifts beyond 1e-6 (implicit solve failed) or
        more than 1e-6 of the probability reaches the last 10% of the grid
        (reflection off the far wall would contaminate the run).
    """
    if t_end is None:
        t_end = program.t_final
    if not 0.0 < t_end <= program.t_final * (1.0 + 1e-12):
        raise ValueError("t_end must lie in (0, t_final]")
    n_steps = int(round(t_end / spec.dt))
    if n_steps < 1:
        raise ValueError("t_end shorter than one step")

    dx = spec.dx
    xs = spec.xs
    interior = xs[1:-1]
    u = state.psi[1:-1].astype(complex).copy()
    norm0 = np.sqrt(dx * np.sum(np.abs(u) ** 2))
    if abs(norm0 - 1.0) > 1e-6:
        raise ValueError("grid state must be normalized")

    # time-dependent factor of the potential x*(1/2 - eps w^2 cos phi),
    # evaluated at half steps
    t_half = spec.dt * (np.arange(n_steps) + 0.5)
    t_half = np.minimum(t_half, program.t_final)
    pot_coef = 0.5 - program.epsilon * np.asarray(
        omega_at(program, t_half)
    ) ** 2 * np.cos(phase_at(program, t_half))

    kin_diag = 1.0 / dx**2
    kin_off = -0.5 / dx**2
    m = len(u)
    half_i = 0.5j * spec.dt
    ab = np.zeros((3, m), dtype=complex)
    ab[0, 1:] = half_i * kin_off
    ab[2, :-1] = half_i * kin_off

    modes = _sampled_modes(basis, spec) if basis is not None else None
    tail_start = int(0.9 * m)

    records: list[ObservableRecord] = []
    occupation_history: list[np.ndarray] = []
    max_drift = 0.0
    max_tail = 0.0

    def sample(step: int) -> None:
        nonlocal max_drift, max_tail
        t = step * spec.dt
        dens = np.abs(u) ** 2
        norm = np.sqrt(dx * dens.sum())
        drift = abs(norm - 1.0)
        max_drift = max(max_drift, drift)
        if not np.isfinite(norm) or drift > NORM_ABORT:
            raise PropagationError(f"grid norm drift {drift:.3e} at t = {t:.6g}")
        tail = dx * dens[tail_start:].sum()
        max_tail = max(max_tail, tail)
        if tail > TAIL_ABORT:
            raise PropagationError(
                f"probability {tail:.3e} reached the far-wall region at t = {t:.6g}; "
                "increase x_max"
            )
        if modes is not None:
            full = np.concatenate(([0.0], u, [0.0]))
            rec = _grid_record(
                basis, modes, spec, t, float(omega_at(program, min(t, program.t_final))), full
            )
            records.append(rec)
            occupation_history.append(rec.occupations)

    sample(0)
    nb = np.empty_like(u)
    for step in range(n_steps):
        v = kin_diag + pot_coef[step] * interior
        nb[:-1] = u[1:]
        nb[-1] = 0.0
        nb[1:] += u[:-1]
        rhs = (1.0 - half_i * v) * u - half_i * kin_off * nb
        ab[1, :] = 1.0 + half_i * v
        u = solve_banded((1, 1), ab, rhs, check_finite=False)
        done = step + 1
        if done % sample_every == 0 or done == n_steps:
            sample(done)

    psi = np.concatenate(([0.0], u, [0.0]))
    return GridResult(
        records=records,
        final_state=GridState(t=n_steps * spec.dt, psi=psi),
        norm_drift=max_drift,
        max_tail_fraction=max_tail,
        occupation_history=occupation_history,
    )
