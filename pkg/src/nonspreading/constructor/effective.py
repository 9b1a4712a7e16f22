"""Effective potential in the co-moving frame and the consistency condition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Grid, UnitSystem
from ..errors import ComplexPotential
from ..specs import MotionSpec, PotentialSpec, is_real, motion_eval, potential_real

DEFAULT_DEGREE = 8
DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EffectivePotential:
    """V_eff(q) = V(q + d, t) - V(d, t) + m d'' q sampled on a q-grid.

    ``poly_coeffs[n]`` multiplies q**n (power basis, least-squares fit).
    """

    q_grid: Grid
    samples: np.ndarray
    poly_coeffs: np.ndarray
    fit_residual: float
    time: float = 0.0

    @property
    def half_width(self) -> float:
        return float(np.max(np.abs(self.q_grid.x)))

    def is_linear(self, rel_tol: float = 1e-10) -> bool:
        """True when all q**n terms, n >= 2, are negligible next to c1 q."""
        c = self.poly_coeffs
        if c.size < 2 or c[1] == 0.0:
            return False
        L = self.half_width
        higher = max((abs(c[n]) * L**n for n in range(2, c.size)), default=0.0)
        return higher <= rel_tol * abs(c[1]) * L and self.fit_residual <= 1e-9

    def is_confining(self) -> bool:
        v = self.samples
        i = int(np.argmin(v))
        return 0 < i < v.size - 1 and v[0] > v[i] and v[-1] > v[i]


def _fit(q: np.ndarray, v: np.ndarray, degree: int):
    poly = np.polynomial.Polynomial.fit(q, v, degree)
    coeffs = np.zeros(degree + 1)
    conv = poly.convert().coef
    coeffs[: conv.size] = conv
    resid = v - poly(q)
    scale = float(np.max(np.abs(v)))
    rms = float(np.sqrt(np.mean(resid**2)))
    return coeffs, (rms / scale if scale > 0 else rms)


def _veff_samples(pot, motion, q, t, units):
    d, _, a = motion_eval(motion, t, units)
    d, a = float(d), float(a)
    return potential_real(pot, q + d, t, units) - potential_real(pot, d, t, units) + units.mass * a * q


def effective_potential(
    pot: PotentialSpec,
    motion: MotionSpec,
    q_grid: Grid,
    t: float,
    units: UnitSystem = UnitSystem(),
    degree: int = DEFAULT_DEGREE,
) -> EffectivePotential:
    if not is_real(pot):
        raise ComplexPotential("the effective potential is only defined for real V(x, t)")
    q = q_grid.x
    samples = np.asarray(_veff_samples(pot, motion, q, t, units), dtype=float)
    coeffs, resid = _fit(q, samples, degree)
    samples.setflags(write=False)
    return EffectivePotential(q_grid, samples, coeffs, resid, float(t))


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    powers_checked: tuple[int, ...]
    max_time_variation: np.ndarray
    sample_variation: float
    offending_powers: tuple[int, ...]
    tolerance_used: float

    @property
    def consistent(self) -> bool:
        return not self.offending_powers

    @property
    def verdict(self) -> str:
        return "consistent" if self.consistent else "inconsistent"


def consistency_check(
    pot: PotentialSpec,
    motion: MotionSpec,
    q_grid: Grid,
    times,
    units: UnitSystem = UnitSystem(),
    max_degree: int = DEFAULT_DEGREE,
    tol: float = DEFAULT_TOL,
) -> ConsistencyReport:
    """Check that every q-power coefficient of V_eff is constant in time.

    Coefficient variations are compared with ``tol`` directly. A second,
    fit-free test compares the raw samples against the first time slice,
    relative to ``max(1, max|V_eff|)``, so a non-polynomial V_eff that
    changes shape is caught even if the fit hides it.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 8:
        raise ValueError("consistency check needs at least 8 time samples")
    slices = [effective_potential(pot, motion, q_grid, t, units, max_degree) for t in times]
    coeffs = np.array([s.poly_coeffs for s in slices])
    variation = np.max(np.abs(coeffs - coeffs[0]), axis=0)
    samples = np.array([s.samples for s in slices])
    scale = max(1.0, float(np.max(np.abs(samples))))
    sample_var = float(np.max(np.abs(samples - samples[0]))) / scale

    offending = [n for n in range(max_degree + 1) if variation[n] > tol]
    if not offending and sample_var > tol:
        offending = [int(np.argmax(variation))]
    return ConsistencyReport(
        powers_checked=tuple(range(max_degree + 1)),
        max_time_variation=variation,
        sample_variation=sample_var,
        offending_powers=tuple(offending),
        tolerance_used=tol,
    )
