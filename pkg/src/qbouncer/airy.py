"""Airy function Ai and its derivative on the real line, implemented in-repo.

The eigenstructure of the bouncer hangs entirely on Ai, so the evaluation is
self-contained and carries an explicit accuracy budget instead of relying on
whatever a platform library happens to ship.  Three regimes are stitched
together (switchovers at |x| = 4 and |x| = 9):

* ``|x| <= 4``  -- Maclaurin series of the two standard solutions f, g of
  y'' = x y.  Cancellation grows like exp(2*zeta) with zeta = (2/3)|x|^(3/2),
  which at the switchover costs ~4e4 * eps ~ 4e-12 relative error; inside the
  interval it is correspondingly smaller.

* ``4 < |x| < 9`` -- recentred Taylor expansions about a fixed table of
  anchor points spaced 0.4 apart.  The anchors are generated once by stepping
  *inward* from |x| = 9.2 (where the asymptotic expansions are accurate to
  ~1e-15), which is the numerically stable direction for Ai on the positive
  axis: any admixture of the growing solution decays toward smaller x.  A
  single evaluation then uses at most |h| = 0.2, so the 28-term local series
  is converged to machine precision.

* ``9 <= |x| <= 100`` -- Poincare asymptotic expansions (exponential form on
  the positive axis, trigonometric form on the negative axis) truncated well
  before their smallest term; at |x| = 9 the optimal-truncation floor is
  ~exp(-2*zeta(9)) ~ 2e-16 of the local amplitude.

Measured against an arbitrary-precision series oracle, the worst error over
[-100, 100] is below 5e-12 relative to the local amplitude scale (see the
test suite), comfortably inside the 1e-10 budget.  Arguments with |x| > 100
are outside the supported range and raise ``ValueError``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AiryPoint", "airy_eval", "airy_ai_aip", "SERIES_CUT", "ASYM_CUT", "RANGE_MAX"]

AI_ZERO = 0.35502805388781724    # Ai(0)  = 3^(-2/3)/Gamma(2/3)
AIP_ZERO = -0.25881940379280680  # Ai'(0) = -3^(-1/3)/Gamma(1/3)

SERIES_CUT = 4.0
ASYM_CUT = 9.0
RANGE_MAX = 100.0

_SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class AiryPoint:
    """Value pair (Ai(x), Ai'(x)) at a real argument."""

    ai: float
    ai_prime: float


def _maclaurin(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ai, Ai' from the Maclaurin series; accurate for |x| <= SERIES_CUT."""
    x3 = x**3
    f = np.ones_like(x)
    g = x.copy()
    tf = np.ones_like(x)
    tg = x.copy()
    # y'' = x y gives a_{3k} = a_{3k-3}/((3k)(3k-1)) for the even solution f
    # and a_{3k+1} = a_{3k-2}/((3k+1)(3k)) for the odd solution g.
    for k in range(1, 42):
        tf = tf * x3 / ((3 * k) * (3 * k - 1))
        tg = tg * x3 / ((3 * k + 1) * (3 * k))
        f = f + tf
        g = g + tg
    fp = x**2 / 2.0
    u = x**2 / 2.0
    for k in range(2, 42):
        u = u * x3 / ((3 * k - 1) * (3 * k - 3))
        fp = fp + u
    gp = np.ones_like(x)
    v = np.ones_like(x)
    for k in range(1, 42):
        v = v * x3 / ((3 * k) * (3 * k - 2))
        gp = gp + v
    return AI_ZERO * f + AIP_ZERO * g, AI_ZERO * fp + AIP_ZERO * gp


def _u_coeffs(n: int) -> np.ndarray:
    """First n+1 coefficients u_k of the Airy asymptotic series."""
    u = np.empty(n + 1)
    u[0] = 1.0
    for k in range(n):
        u[k + 1] = u[k] * (3 * k + 0.5) * (3 * k + 1.5) * (3 * k + 2.5) / (54.0 * (k + 1) * (k + 0.5))
    return u


_UK = _u_coeffs(40)
_VK = _UK * np.concatenate(([1.0], (6 * np.arange(1, 41) + 1.0) / (1.0 - 6 * np.arange(1, 41))))


def _asymptotic_positive(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ai, Ai' for x >= ASYM_CUT via the exponentially decaying expansion."""
    zeta = (2.0 / 3.0) * x**1.5
    su = np.ones_like(x)
    sv = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 25):
        term = term * (-_UK[k] / _UK[k - 1]) / zeta
        su = su + term
        sv = sv + term * (_VK[k] / _UK[k])
    pref = np.exp(-zeta) / (2.0 * _SQRT_PI * x**0.25)
    return pref * su, -(x**0.25) * np.exp(-zeta) / (2.0 * _SQRT_PI) * sv


def _asymptotic_negative(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ai, Ai' for x <= -ASYM_CUT via the oscillatory expansion."""
    z = -x
    zeta = (2.0 / 3.0) * z**1.5
    zinv2 = zeta ** (-2)
    p = np.zeros_like(z)
    q = np.zeros_like(z)
    r = np.zeros_like(z)
    s = np.zeros_like(z)
    even = np.ones_like(z)  # zeta^(-2k) with sign (-1)^k folded in below
    for k in range(0, 12):
        sign = -1.0 if k % 2 else 1.0
        p = p + sign * _UK[2 * k] * even
        r = r + sign * _VK[2 * k] * even
        odd = even / zeta
        q = q + sign * _UK[2 * k + 1] * odd
        s = s + sign * _VK[2 * k + 1] * odd
        even = even * zinv2
    arg = zeta - np.pi / 4.0
    c = np.cos(arg)
    sn = np.sin(arg)
    ai = (c * p + sn * q) / (_SQRT_PI * z**0.25)
    aip = (sn * r - c * s) * z**0.25 / _SQRT_PI
    return ai, aip


# ---------------------------------------------------------------------------
# Recentred Taylor table for the intermediate region.

_N_TAYLOR = 30
_ANCHOR_STEP = 0.4
_ANCHOR_LO = 4.0
_ANCHOR_HI = 9.2
_anchor_table: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _taylor_coeffs(x0: float, y0: float, yp0: float, nterms: int) -> np.ndarray:
    """Taylor coefficients a_k of y about x0, for y'' = x y."""
    a = np.zeros(nterms)
    a[0] = y0
    a[1] = yp0
    a[2] = x0 * y0 / 2.0
    for k in range(1, nterms - 2):
        a[k + 2] = (x0 * a[k] + a[k - 1]) / ((k + 1) * (k + 2))
    return a


def _build_anchor_table(sign: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient table for anchors at sign*(4.0, 4.4, ..., 9.2).

    Anchors are generated by Taylor-stepping inward from the asymptotic
    endpoint at sign*9.2.  Returns (anchor positions, coeffs[n_anchor, k]).
    """
    positions = sign * np.arange(_ANCHOR_HI, _ANCHOR_LO - 1e-9, -_ANCHOR_STEP)
    start = np.array([positions[0]])
    if sign > 0:
        y, yp = _asymptotic_positive(start)
    else:
        y, yp = _asymptotic_negative(start)
    coeffs = np.empty((len(positions), _N_TAYLOR))
    cur_y, cur_yp = float(y[0]), float(yp[0])
    coeffs[0] = _taylor_coeffs(positions[0], cur_y, cur_yp, _N_TAYLOR)
    for i in range(1, len(positions)):
        step = _taylor_coeffs(positions[i - 1], cur_y, cur_yp, 36)
        h = positions[i] - positions[i - 1]
        val = 0.0
        der = 0.0
        for k in range(len(step) - 1, 0, -1):
            val = val * h + step[k]
            der = der * h + k * step[k]
        val = val * h + step[0]
        cur_y, cur_yp = val, der
        coeffs[i] = _taylor_coeffs(positions[i], cur_y, cur_yp, _N_TAYLOR)
    order = np.argsort(positions)
    return positions[order], coeffs[order]


def _anchors(sign: int) -> tuple[np.ndarray, np.ndarray]:
    if sign not in _anchor_table:
        _anchor_table[sign] = _build_anchor_table(sign)
    return _anchor_table[sign]


def _recentred_taylor(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ai, Ai' in the gap SERIES_CUT < |x| < ASYM_CUT (either sign mixed)."""
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    for sign in (1, -1):
        mask = (x > 0) if sign > 0 else (x < 0)
        if not mask.any():
            continue
        positions, coeffs = _anchors(sign)
        xs = x[mask]
        idx = np.clip(np.rint((xs - positions[0]) / _ANCHOR_STEP).astype(int), 0, len(positions) - 1)
        h = xs - positions[idx]
        val = np.zeros_like(xs)
        der = np.zeros_like(xs)
        for k in range(_N_TAYLOR - 1, 0, -1):
            ak = coeffs[idx, k]
            val = val * h + ak
            der = der * h + k * ak
        val = val * h + coeffs[idx, 0]
        ai[mask] = val
        aip[mask] = der
    return ai, aip


def airy_ai_aip(x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (Ai(x), Ai'(x)) for real |x| <= 100.

    Raises
    ------
    ValueError
        If any argument is non-finite or outside [-100, 100].
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("airy argument must be finite")
    if np.any(np.abs(arr) > RANGE_MAX):
        raise ValueError(f"airy argument outside supported range |x| <= {RANGE_MAX:g}")
    flat = arr.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    absx = np.abs(flat)
    small = absx <= SERIES_CUT
    large_pos = flat >= ASYM_CUT
    large_neg = flat <= -ASYM_CUT
    mid = ~(small | large_pos | large_neg)
    if small.any():
        ai[small], aip[small] = _maclaurin(flat[small])
    if mid.any():
        ai[mid], aip[mid] = _recentred_taylor(flat[mid])
    if large_pos.any():
        ai[large_pos], aip[large_pos] = _asymptotic_positive(flat[large_pos])
    if large_neg.any():
        ai[large_neg], aip[large_neg] = _asymptotic_negative(flat[large_neg])
    return ai.reshape(arr.shape), aip.reshape(arr.shape)


def airy_eval(x: float) -> AiryPoint:
    """Scalar evaluation of Ai and Ai' at a real argument."""
    ai, aip = airy_ai_aip(float(x))
    return AiryPoint(ai=float(ai), ai_prime=float(aip))
