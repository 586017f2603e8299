"""Wigner quasi-probability distribution of a hard-wall state.

W(x, p) = (1/pi) * integral dy  psi*(x+y) psi(x-y) exp(2ipy)

evaluated on a uniform position grid, with psi extended by zero for x < 0
(the standard hard-wall convention; it is exactly this extension that makes
the marginal identities below hold and testable).  For each grid row x_i the
correlation product is transformed along y by an FFT of twice the grid
length, so the momentum grid is fixed by the position spacing:

    p_j = pi * j / (L dx),   j = -L/2 .. L/2 - 1,   L = 2 * n_points.

With that pairing the p-marginal identity  sum_j W(x, p_j) dp = |psi(x)|^2
holds exactly in the discrete sense, and integral W dx dp = 1 follows from
the input normalization.  The correlation is conjugate-symmetric in y, so the
transform is real up to roundoff; the imaginary part is discarded after an
internal sanity bound.  Rows can be trimmed to |p| <= p_max for output size;
all identities survive trimming because the physical momentum support decays
super-exponentially.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["WignerGrid", "wigner_transform", "classical_overlay", "momentum_density"]


@dataclass(frozen=True)
class WignerGrid:
    """Wigner matrix W[i, j] = W(xs[i], ps[j]) plus its context."""

    xs: np.ndarray
    ps: np.ndarray
    w: np.ndarray
    t: float = 0.0
    omega_d: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def dp(self) -> float:
        return float(self.ps[1] - self.ps[0])

    def marginal_position(self) -> np.ndarray:
        """integral W dp per row; equals |psi(x)|^2."""
        return self.w.sum(axis=1) * self.dp

    def marginal_momentum(self) -> np.ndarray:
        """integral W dx per column; equals |psi~(p)|^2 up to truncation."""
        return self.w.sum(axis=0) * self.dx

    def total(self) -> float:
        return float(self.w.sum() * self.dx * self.dp)

    def purity(self) -> float:
        """2 pi * integral W^2 dx dp; equals 1 for a pure state."""
        return float(2.0 * np.pi * np.sum(self.w**2) * self.dx * self.dp)


def wigner_transform(
    psi: np.ndarray,
    xs: np.ndarray,
    p_max: float | None = None,
    t: float = 0.0,
    omega_d: float = 0.0,
) -> WignerGrid:
    """Wigner function of a normalized wavefunction sampled on a uniform grid.

    Parameters
    ----------
    psi : complex array
        Samples on `xs`; must satisfy dx * sum |psi|^2 = 1 to 1e-6 and carry
        negligible weight near the outer edge (boundary truncation < 1e-6).
    xs : float array
        Uniform grid starting at 0.
    p_max : float, optional
        Keep only momentum rows with |p| <= p_max (None keeps everything).
    """
    psi = np.asarray(psi, dtype=complex)
    xs = np.asarray(xs, dtype=float)
    if psi.ndim != 1 or psi.shape != xs.shape:
        raise ValueError("psi and xs must be matching 1-D arrays")
    n = len(xs)
    dx = float(xs[1] - xs[0])
    if abs(xs[0]) > 1e-12:
        raise ValueError("position grid must start at x = 0")
    norm = dx * float(np.sum(np.abs(psi) ** 2))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"input not normalized on the grid: |psi|^2 integrates to {norm:.8f}")
    tail = dx * float(np.sum(np.abs(psi[int(0.95 * n):]) ** 2))
    if tail > 1e-6:
        raise ValueError(
            f"wavefunction carries {tail:.2e} probability near the grid edge; enlarge the grid"
        )

    length = 2 * n
    # correlation C[i, k] = conj(psi(x_i + y_k)) psi(x_i - y_k), y_k = kappa*dx
    kappa = np.fft.fftfreq(length, d=1.0 / length).astype(int)  # 0..n-1, -n..-1
    idx_plus = np.arange(n)[:, None] + kappa[None, :]
    idx_minus = np.arange(n)[:, None] - kappa[None, :]
    valid = (idx_plus >= 0) & (idx_plus < n) & (idx_minus >= 0) & (idx_minus < n)
    corr = np.zeros((n, length), dtype=complex)
    np.copyto(
        corr,
        np.conj(psi[np.clip(idx_plus, 0, n - 1)]) * psi[np.clip(idx_minus, 0, n - 1)],
        where=valid,
    )
    # sum_k C e^{2 i p y_k} dy with p_j = pi j/(L dx)  <=>  L * ifft along k
    spectrum = np.fft.ifft(corr, axis=1) * length
    w = spectrum.real * (dx / np.pi)
    residual = np.max(np.abs(spectrum.imag)) * (dx / np.pi)
    if residual > 1e-10:
        raise RuntimeError(f"Wigner transform lost realness: imaginary residue {residual:.2e}")

    ps = np.pi * np.fft.fftfreq(length, d=dx)
    order = np.argsort(ps)
    ps = ps[order]
    w = w[:, order]
    if p_max is not None:
        keep = np.abs(ps) <= p_max
        if not keep.any():
            raise ValueError("p_max excludes the whole momentum grid")
        ps = ps[keep]
        w = w[:, keep]
    return WignerGrid(xs=xs, ps=ps, w=w, t=t, omega_d=omega_d)


def momentum_density(psi: np.ndarray, xs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """|psi~(p)|^2 by direct Fourier transform (oracle for the p-marginal)."""
    psi = np.asarray(psi, dtype=complex)
    xs = np.asarray(xs, dtype=float)
    dx = float(xs[1] - xs[0])
    phases = np.exp(-1j * np.outer(ps, xs))
    amps = phases @ psi * dx / np.sqrt(2.0 * np.pi)
    return np.abs(amps) ** 2


def classical_overlay(energy: float, n_points: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Classical orbit p(x) = sqrt(2H - x), x in [0, 2H], for plotting over W.

    Returns (x, p) with p >= 0; the orbit is symmetric under p -> -p.
    """
    if not energy > 0.0:
        raise ValueError("energy must be positive")
    x = np.linspace(0.0, 2.0 * energy, n_points)
    p = np.sqrt(np.maximum(2.0 * energy - x, 0.0))
    return x, p
