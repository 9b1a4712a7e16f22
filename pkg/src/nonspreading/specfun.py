"""Airy Ai and normalized harmonic-oscillator eigenfunctions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import UnitSystem
from .errors import DomainOverflow, IndexTooLarge

AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
MAX_SHO_INDEX = 50
_NEGATIVE_LIMIT = -1e6
_UNDERFLOW_ARG = 110.0  # Ai(110) ~ 1e-337, below the smallest double
_BLEND_HALF_WIDTH = 0.5


@dataclass(frozen=True)
class SpecFunAccuracy:
    """Switch points between the Maclaurin and asymptotic branches of Ai.

    The oscillatory side needs a later switch than the decaying side: at
    x = -5 the optimally truncated asymptotic series is only good to ~1e-8.
    """

    abs_tol: float = 1e-10
    series_asymptotic_switch: float = 5.0
    negative_switch: float = 7.0

    def __post_init__(self):
        if self.abs_tol <= 0 or self.series_asymptotic_switch <= 0 or self.negative_switch <= 0:
            raise ValueError("accuracy settings must be positive")


DEFAULT_ACCURACY = SpecFunAccuracy()


def _ai_series(x: np.ndarray) -> np.ndarray:
    # Ai = Ai(0) f(x) + Ai'(0) g(x) with the two Maclaurin series of y'' = x y.
    x3 = x**3
    tf = np.ones_like(x)
    tg = x.copy()
    f = tf.copy()
    g = tg.copy()
    for k in range(1, 200):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        if np.all(np.abs(tf) + np.abs(tg) <= 1e-17 * (np.abs(f) + np.abs(g))):
            break
    return AI0 * f + AIP0 * g


def _u_coefficients(count: int) -> np.ndarray:
    u = np.empty(count)
    u[0] = 1.0
    for k in range(1, count):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    return u


_U = _u_coefficients(80)


def _truncated_sums(zeta: np.ndarray, alternating_pairs: bool):
    """Optimally truncated asymptotic sums in 1/zeta.

    Returns (P, Q) with P collecting even k and Q odd k when
    ``alternating_pairs`` is set (oscillatory branch), else (S, None) with the
    plain alternating sum (decaying branch).
    """
    p = np.zeros_like(zeta)
    q = np.zeros_like(zeta)
    prev = np.full_like(zeta, np.inf)
    active = np.ones(zeta.shape, dtype=bool)
    for k in range(_U.size):
        with np.errstate(over="ignore"):
            term = _U[k] / zeta**k
        active &= term < prev
        if not active.any():
            break
        prev = np.where(active, term, prev)
        if alternating_pairs:
            sign = -1.0 if (k // 2) % 2 else 1.0
            if k % 2 == 0:
                p += np.where(active, sign * term, 0.0)
            else:
                q += np.where(active, sign * term, 0.0)
        else:
            p += np.where(active, (-1.0) ** k * term, 0.0)
    return p, (q if alternating_pairs else None)


def _ai_asymptotic_positive(x: np.ndarray) -> np.ndarray:
    zeta = 2.0 / 3.0 * x**1.5
    s, _ = _truncated_sums(zeta, alternating_pairs=False)
    return s * np.exp(-zeta) / (2.0 * math.sqrt(math.pi) * x**0.25)


def _ai_asymptotic_negative(x: np.ndarray) -> np.ndarray:
    ax = -x
    zeta = 2.0 / 3.0 * ax**1.5
    p, q = _truncated_sums(zeta, alternating_pairs=True)
    theta = zeta + math.pi / 4.0
    return (np.sin(theta) * p - np.cos(theta) * q) / (math.sqrt(math.pi) * ax**0.25)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u**2)


def airy_ai(x, accuracy: SpecFunAccuracy = DEFAULT_ACCURACY):
    """Airy function Ai for real arguments.

    Uses the two-series Maclaurin form near the origin and the asymptotic
    expansions (optimally truncated) further out. Scalars in, scalar out;
    arrays in, arrays out.

    Raises
    ------
    DomainOverflow
        For x < -1e6, where the oscillatory phase can no longer be resolved
        in double precision.
    """
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(xa)):
        raise DomainOverflow("Ai requires finite arguments")
    if np.any(xa < _NEGATIVE_LIMIT):
        raise DomainOverflow(f"Ai argument below {_NEGATIVE_LIMIT:g}")
    out = np.zeros_like(xa)
    lo, hi = -accuracy.negative_switch, accuracy.series_asymptotic_switch
    w = _BLEND_HALF_WIDTH
    series = (xa > lo - w) & (xa < hi + w)
    pos = (xa > hi - w) & (xa < _UNDERFLOW_ARG)
    neg = xa < lo + w
    s_val = np.zeros_like(xa)
    if series.any():
        s_val[series] = _ai_series(xa[series])
    out[series] = s_val[series]
    # blend across each switch so the result stays smooth there
    if pos.any():
        a = _ai_asymptotic_positive(xa[pos])
        wt = _smoothstep((xa[pos] - (hi - w)) / (2 * w))
        out[pos] = wt * a + (1.0 - wt) * s_val[pos]
    if neg.any():
        a = _ai_asymptotic_negative(xa[neg])
        wt = _smoothstep(((lo + w) - xa[neg]) / (2 * w))
        out[neg] = wt * a + (1.0 - wt) * s_val[neg]
    return float(out[0]) if scalar else out


def sho_eigenfunction(n: int, x, units: UnitSystem = UnitSystem(), omega: float = 1.0):
    """Normalized harmonic-oscillator eigenfunction psi_n(x).

    Built from the normalized Hermite-function recurrence

        psi_k = sqrt(2/k) xi psi_{k-1} - sqrt((k-1)/k) psi_{k-2},

    with xi = sqrt(m omega / hbar) x, so no large Hermite polynomial values are
    ever formed. psi_n is positive on the x -> +inf side.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"eigen-index must be a non-negative integer, got {n}")
    n = int(n)
    if n > MAX_SHO_INDEX:
        raise IndexTooLarge(f"n={n} exceeds {MAX_SHO_INDEX}")
    scalar = np.ndim(x) == 0
    alpha = units.mass * omega / units.hbar
    xi = math.sqrt(alpha) * np.atleast_1d(np.asarray(x, dtype=np.float64))
    prev = np.zeros_like(xi)
    cur = (alpha / math.pi) ** 0.25 * np.exp(-0.5 * xi**2)
    for k in range(1, n + 1):
        prev, cur = cur, math.sqrt(2.0 / k) * xi * cur - math.sqrt((k - 1) / k) * prev
    return float(cur[0]) if scalar else cur


def sho_energy(n: int, units: UnitSystem, omega: float) -> float:
    return units.hbar * omega * (n + 0.5)
