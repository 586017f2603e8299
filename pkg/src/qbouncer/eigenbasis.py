"""Eigenstructure of the quantum bouncer in scaled units.

The stationary problem  -psi''/2 + (x/2) psi = E psi  on x >= 0 with a hard
wall at the origin has eigenfunctions

    psi_n(x) = Ai(x + lambda_n) / |Ai'(lambda_n)|,      n = 1, 2, ...

where lambda_n < 0 is the n-th zero of Ai, and eigenvalues E_n = |lambda_n|/2.
This module finds the zeros by bracketed root-finding on the in-repo Airy
implementation, assembles the dipole coupling matrix X[m][n] = <m|x|n> by
adaptive panel quadrature, and cross-checks it against the closed forms

    X[n][n] = (2/3)|lambda_n|,      |X[m][n]| = 2/(lambda_m - lambda_n)^2.

The sign convention of X is whatever the quadrature of the eigenfunctions
above produces (the closed forms fix magnitudes only): with psi_n normalized
by |Ai'(lambda_n)| > 0, neighbouring levels couple with positive sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .airy import RANGE_MAX, airy_ai_aip

__all__ = [
    "EigenBasis",
    "build_basis",
    "eigenfunction",
    "eigenfunction_matrix",
    "position_moment",
    "airy_zero_seeds",
    "dump_basis_csv",
]

MAX_LEVELS = 200
_GL_NODES = 16
_PANEL_WIDTH = 0.5
_TAIL = 16.0  # integration runs this far past the last turning point


@dataclass(frozen=True)
class EigenBasis:
    """First N levels of the bouncer: zeros, energies, dipole couplings."""

    n_levels: int
    zeros: np.ndarray        # lambda_n, negative, strictly decreasing
    energies: np.ndarray     # E_n = |lambda_n| / 2, scaled
    norm_derivs: np.ndarray  # Ai'(lambda_n)
    dipole: np.ndarray       # X[m][n] = <m|x|n>, scaled length

    @property
    def turning_points(self) -> np.ndarray:
        """Classical turning points x_n = 2 E_n = |lambda_n|."""
        return np.abs(self.zeros)

    def energies_pev(self, scales) -> np.ndarray:
        """Eigenenergies in peV for the given :class:`~qbouncer.units.ScaledUnits`."""
        from .units import PEV

        return self.energies * scales.energy_E0 / PEV


def airy_zero_seeds(n_levels: int) -> np.ndarray:
    """Asymptotic estimates lambda_n ~ -(3 pi (4n-1)/8)^(2/3)."""
    n = np.arange(1, n_levels + 1)
    return -((3.0 * np.pi * (4.0 * n - 1.0) / 8.0) ** (2.0 / 3.0))


def _ai_scalar(x: float) -> float:
    return float(airy_ai_aip(x)[0])


def _find_zeros(n_levels: int) -> np.ndarray:
    seeds = airy_zero_seeds(n_levels)
    zeros = np.empty(n_levels)
    for i, seed in enumerate(seeds):
        # bracket half-width ~ a third of the local zero spacing pi/sqrt(|x|)
        delta = 0.35 * np.pi / np.sqrt(-seed)
        lo, hi = seed - delta, seed + delta
        if _ai_scalar(lo) * _ai_scalar(hi) >= 0.0:
            lo, hi = seed - 2.0 * delta, seed + 2.0 * delta
            if _ai_scalar(lo) * _ai_scalar(hi) >= 0.0:
                raise RuntimeError(f"failed to bracket Airy zero index {i + 1}")
        zeros[i] = brentq(_ai_scalar, lo, hi, xtol=1e-14, rtol=8.9e-16)
    return zeros


def _panel_quadrature(x_max: float, panel_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, x_max]."""
    n_panels = max(1, int(np.ceil(x_max / panel_width)))
    gx, gw = np.polynomial.legendre.leggauss(_GL_NODES)
    edges = np.linspace(0.0, x_max, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel()
    return nodes, weights


def _eigenfunction_values(zeros: np.ndarray, norm_derivs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Matrix psi[n, j] = psi_{n+1}(x_j); arguments past the Ai range give 0."""
    args = x[None, :] + zeros[:, None]
    out = np.zeros_like(args)
    mask = args <= RANGE_MAX
    if mask.any():
        out[mask] = airy_ai_aip(args[mask])[0]
    return out / np.abs(norm_derivs)[:, None]


def _dipole_by_quadrature(zeros: np.ndarray, norm_derivs: np.ndarray) -> np.ndarray:
    """X[m][n] by adaptive composite quadrature (panel-halving refinement)."""
    x_max = float(np.abs(zeros[-1]) + _TAIL)
    previous = None
    width = _PANEL_WIDTH
    for _ in range(4):
        nodes, weights = _panel_quadrature(x_max, width)
        psi = _eigenfunction_values(zeros, norm_derivs, nodes)
        dipole = (psi * (weights * nodes)[None, :]) @ psi.T
        if previous is not None and np.max(np.abs(dipole - previous)) < 1e-11:
            return (dipole + dipole.T) / 2.0
        previous = dipole
        width /= 2.0
    raise RuntimeError("dipole quadrature failed to converge under panel refinement")


def _check_dipole_closed_forms(zeros: np.ndarray, dipole: np.ndarray) -> None:
    diag_ref = (2.0 / 3.0) * np.abs(zeros)
    err_diag = np.max(np.abs(np.diag(dipole) - diag_ref))
    gaps = zeros[:, None] - zeros[None, :]
    np.fill_diagonal(gaps, 1.0)
    off_ref = 2.0 / gaps**2
    err_off = np.abs(np.abs(dipole) - off_ref)
    np.fill_diagonal(err_off, 0.0)
    worst = np.unravel_index(np.argmax(err_off), err_off.shape)
    if err_diag > 1e-8 or err_off[worst] > 1e-8:
        raise RuntimeError(
            "dipole quadrature disagrees with closed forms: "
            f"diag err {err_diag:.2e}, off-diag err {err_off[worst]:.2e} at "
            f"(m, n) = ({worst[0] + 1}, {worst[1] + 1})"
        )


def build_basis(n_levels: int) -> EigenBasis:
    """Build the first `n_levels` bouncer eigenstates (1 <= n_levels <= 200)."""
    if not isinstance(n_levels, (int, np.integer)) or isinstance(n_levels, bool):
        raise ValueError("n_levels must be an integer")
    if not 1 <= n_levels <= MAX_LEVELS:
        raise ValueError(f"n_levels must be in [1, {MAX_LEVELS}], got {n_levels}")
    zeros = _find_zeros(int(n_levels))
    norm_derivs = airy_ai_aip(zeros)[1]
    dipole = _dipole_by_quadrature(zeros, norm_derivs)
    _check_dipole_closed_forms(zeros, dipole)
    return EigenBasis(
        n_levels=int(n_levels),
        zeros=zeros,
        energies=np.abs(zeros) / 2.0,
        norm_derivs=norm_derivs,
        dipole=dipole,
    )


def eigenfunction(basis: EigenBasis, n: int, x) -> np.ndarray:
    """psi_n evaluated at scaled positions x >= 0 (n is 1-based)."""
    if not 1 <= n <= basis.n_levels:
        raise ValueError(f"level index {n} outside [1, {basis.n_levels}]")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("eigenfunctions are defined on x >= 0")
    values = _eigenfunction_values(
        basis.zeros[n - 1 : n], basis.norm_derivs[n - 1 : n], np.atleast_1d(arr).ravel()
    )[0]
    return values.reshape(arr.shape) if arr.shape else float(values[0])


def eigenfunction_matrix(basis: EigenBasis, xs) -> np.ndarray:
    """Matrix psi[n-1, j] = psi_n(xs[j]) for all levels at once."""
    arr = np.asarray(xs, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("eigenfunctions are defined on x >= 0")
    return _eigenfunction_values(basis.zeros, basis.norm_derivs, arr.ravel()).reshape(
        (basis.n_levels,) + arr.shape
    )


def position_moment(basis: EigenBasis, n: int, power: int = 1) -> float:
    """<n| x^power |n> by the same adaptive panel quadrature as the dipole."""
    if not 1 <= n <= basis.n_levels:
        raise ValueError(f"level index {n} outside [1, {basis.n_levels}]")
    x_max = float(np.abs(basis.zeros[n - 1]) + _TAIL)
    previous = None
    width = _PANEL_WIDTH
    for _ in range(4):
        nodes, weights = _panel_quadrature(x_max, width)
        psi = _eigenfunction_values(
            basis.zeros[n - 1 : n], basis.norm_derivs[n - 1 : n], nodes
        )[0]
        value = float(np.sum(weights * nodes**power * psi**2))
        if previous is not None and abs(value - previous) < 1e-11 * max(1.0, abs(value)):
            return value
        previous = value
        width /= 2.0
    raise RuntimeError(f"moment quadrature failed to converge for level {n}")


def dump_basis_csv(basis: EigenBasis, directory) -> list[Path]:
    """Write levels and dipole matrix as CSV files for external verification."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    levels = directory / "basis_levels.csv"
    with levels.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,lambda_n,energy_scaled,ai_prime\n")
        for i in range(basis.n_levels):
            fh.write(
                f"{i + 1},{basis.zeros[i]:.17g},{basis.energies[i]:.17g},{basis.norm_derivs[i]:.17g}\n"
            )
    dipole = directory / "basis_dipole.csv"
    with dipole.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"x_{j + 1}" for j in range(basis.n_levels)) + "\n")
        for row in basis.dipole:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return [levels, dipole]
