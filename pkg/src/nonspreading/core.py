"""Units, the uniform spatial grid, wavefunction samples and discrete calculus."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatch, InvalidGrid

MIN_POINTS = 16


@dataclass(frozen=True)
class UnitSystem:
    """Values of hbar and the particle mass. Defaults are natural units."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_i = x_min + i*dx`` including both endpoints."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise InvalidGrid("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise InvalidGrid(f"x_min={self.x_min} must be below x_max={self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise InvalidGrid(f"n_points must be an integer >= {MIN_POINTS}, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n_points)
        x.setflags(write=False)
        return x

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def center(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    def window_mask(self, fraction: float) -> np.ndarray:
        """Boolean mask for the central ``fraction`` of the grid."""
        half = 0.5 * fraction * self.length
        return (self.x >= self.center - half) & (self.x <= self.center + half)


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    return Grid(float(x_min), float(x_max), n_points)


@dataclass(frozen=True)
class WaveFunction:
    """Complex samples of Psi(x, t) on a grid.

    The first and last samples are boundary data for the propagator; they are
    zero for a normalizable packet.
    """

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n_points,):
            raise GridMismatch(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("wavefunction samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def with_values(self, values: np.ndarray, time: float | None = None) -> "WaveFunction":
        return WaveFunction(self.grid, values, self.time if time is None else time)


def trapezoid(y: np.ndarray, dx: float) -> complex | float:
    """Composite trapezoid rule on uniform spacing."""
    return dx * (np.sum(y) - 0.5 * (y[0] + y[-1]))


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    """Discrete L2 pairing: trapezoid rule applied to conj(a)*b."""
    if a.grid != b.grid:
        raise GridMismatch("inner product of wavefunctions on different grids")
    return complex(trapezoid(np.conj(a.values) * b.values, a.grid.dx))


def norm_squared(psi: WaveFunction) -> float:
    return float(trapezoid(psi.density, psi.grid.dx))


def second_derivative(psi: WaveFunction | np.ndarray, dx: float | None = None) -> np.ndarray:
    """Three-point second difference, second-order one-sided at the ends.

    Accepts a ``WaveFunction`` or a bare array together with ``dx``.
    """
    if isinstance(psi, WaveFunction):
        y, dx = psi.values, psi.grid.dx
    else:
        y = np.asarray(psi)
        if dx is None:
            raise ValueError("dx is required for bare arrays")
    if y.shape[0] < 4:
        raise InvalidGrid("second derivative needs at least 4 samples")
    out = np.empty_like(y)
    out[1:-1] = (y[:-2] - 2.0 * y[1:-1] + y[2:]) / dx**2
    # 4-point one-sided stencils keep second order at the boundary
    out[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / dx**2
    out[-1] = (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / dx**2
    return out


def first_derivative(y: np.ndarray, dx: float) -> np.ndarray:
    """Central difference, second-order one-sided at the ends."""
    return np.gradient(y, dx, edge_order=2)
