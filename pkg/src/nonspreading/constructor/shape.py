"""Shape functions: eigenfunctions of the co-moving effective potential."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from ..core import Grid, UnitSystem
from ..errors import ConvergenceFailure, NotConfining
from ..specfun import airy_ai
from ..tridiag import B_DIAG, B_OFF, apply_b, kinetic_scale, sturm_count
from .effective import EffectivePotential

_NODE_FLOOR = 1e-10
_BISECTION_MAX_ITER = 200
_INVERSE_ITERATIONS = 3


@dataclass(frozen=True, eq=False)
class ShapeSolution:
    """Real packet profile f(q) with its eigenvalue E_eff.

    Confining shapes are unit-L2 samples on ``q_grid`` and are resampled
    with a cubic spline (zero outside the grid). Airy shapes are evaluated
    in closed form as Ai(airy_scale * q) and are not normalizable.
    """

    q_grid: Grid
    f: np.ndarray
    E_eff: float
    node_count: int
    normalizable: bool
    airy_scale: float | None = None
    _spline: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        if self.airy_scale is None:
            object.__setattr__(self, "_spline", CubicSpline(self.q_grid.x, f))

    def evaluate(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self.airy_scale is not None:
            return airy_ai(self.airy_scale * q)
        out = self._spline(q)
        outside = (q < self.q_grid.x_min) | (q > self.q_grid.x_max)
        return np.where(outside, 0.0, out)

    def support(self, floor: float = 1e-6) -> tuple[float, float]:
        """q-interval where f**2 exceeds ``floor`` times its peak."""
        dens = self.f**2
        idx = np.nonzero(dens > floor * dens.max())[0]
        x = self.q_grid.x
        return float(x[idx[0]]), float(x[idx[-1]])

    def peak_position(self) -> float:
        if self.airy_scale is not None:
            # Ai has its global maximum at the first zero of Ai'
            return -1.0187929716474710 / self.airy_scale
        return float(self.q_grid.x[int(np.argmax(self.f**2))])

    def mean_position(self) -> float:
        if not self.normalizable:
            raise ValueError("mean position is undefined for non-normalizable shapes")
        dx = self.q_grid.dx
        return float(np.sum(self.q_grid.x * self.f**2) * dx / (np.sum(self.f**2) * dx))

    @classmethod
    def from_samples(cls, q_grid: Grid, f, E_eff: float = float("nan")) -> "ShapeSolution":
        """Wrap an arbitrary real profile, normalized to unit L2."""
        f = np.asarray(f, dtype=float)
        f = _fix_sign(f / np.sqrt(np.sum(f**2) * q_grid.dx))
        return cls(q_grid, f, E_eff, count_nodes(f), True)


def count_nodes(f: np.ndarray, floor: float = _NODE_FLOOR) -> int:
    big = f[np.abs(f) > floor * np.max(np.abs(f))]
    return int(np.count_nonzero(np.signbit(big[1:]) != np.signbit(big[:-1])))


def _fix_sign(f: np.ndarray) -> np.ndarray:
    # f > 0 at the point of largest magnitude; ties (odd shapes) go to the right
    mag = np.abs(f)
    idx = np.nonzero(mag >= (1.0 - 1e-6) * mag.max())[0][-1]
    return -f if f[idx] < 0 else f


def _bisect_eigenvalues(v: np.ndarray, c: float, k: int) -> np.ndarray:
    lo = float(v.min())
    span = float(np.ptp(v))
    if span >= 12.0 * c:
        raise ConvergenceFailure(
            "grid too coarse for this potential range: need max(V) - min(V) < 6 hbar^2/(m dx^2)"
        )
    hi = lo + max(span, 1.0) * 1e-3 + c * 1e-6
    while sturm_count(v, c, hi) < k:
        hi = lo + 2.0 * (hi - lo)
        if hi - lo >= 12.0 * c - span:
            raise ConvergenceFailure(f"could not bracket {k} eigenvalues")
    if sturm_count(v, c, lo) != 0:
        raise ConvergenceFailure("Sturm count is nonzero below min(V)")
    values = np.empty(k)
    for j in range(k):
        a, b = lo, hi
        for _ in range(_BISECTION_MAX_ITER):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if sturm_count(v, c, mid) > j:
                b = mid
            else:
                a = mid
            if b - a <= 2e-16 * max(abs(a), abs(b), 1e-300):
                break
        values[j] = 0.5 * (a + b)
        lo = a
    return values


def _inverse_iteration(v: np.ndarray, c: float, lam: float) -> np.ndarray:
    n = v.size
    shift = lam + 1e-10 * max(1.0, abs(lam))
    ab = np.zeros((3, n))
    ab[0, 1:] = -c + B_OFF * (v[1:] - shift)  # row i, column i+1
    ab[1] = 2.0 * c + B_DIAG * (v - shift)
    ab[2, :-1] = -c + B_OFF * (v[:-1] - shift)  # row i+1, column i
    y = np.random.default_rng(20240613).standard_normal(n)
    for _ in range(_INVERSE_ITERATIONS):
        y = solve_banded((1, 1), ab, apply_b(y), check_finite=False)
        y /= np.linalg.norm(y)
    return y


def solve_shape(veff: EffectivePotential, k: int = 1, units: UnitSystem = UnitSystem()) -> list[ShapeSolution]:
    """Lowest ``k`` shape functions of -(hbar^2/2m) f'' + V_eff f = E_eff f.

    A linear V_eff has no bound states; it returns the single Airy profile
    Ai((2 m c1 / hbar^2)^(1/3) q) with E_eff = 0 instead.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    grid = veff.q_grid
    if veff.is_linear():
        c1 = float(veff.poly_coeffs[1])
        scale = float(np.cbrt(2.0 * units.mass * c1 / units.hbar**2))
        f = airy_ai(scale * grid.x)
        return [ShapeSolution(grid, f, 0.0, 0, False, airy_scale=scale)]
    if not veff.is_confining():
        raise NotConfining("effective potential is neither confining nor linear on this grid")

    c = kinetic_scale(grid.dx, units.hbar, units.mass)
    v = np.asarray(veff.samples[1:-1], dtype=float)
    energies = _bisect_eigenvalues(v, c, k)
    wall = min(veff.samples[0], veff.samples[-1])
    if energies[-1] >= wall:
        raise NotConfining(
            f"eigenvalue {energies[-1]:.6g} is not below the potential at the grid edge ({wall:.6g})"
        )
    out = []
    for E in energies:
        f = np.zeros(grid.n_points)
        f[1:-1] = _inverse_iteration(v, c, E)
        f /= np.sqrt(np.sum(f**2) * grid.dx)
        f = _fix_sign(f)
        out.append(ShapeSolution(grid, f, float(E), count_nodes(f), True))
    return out
