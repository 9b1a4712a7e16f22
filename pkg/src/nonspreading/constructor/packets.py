"""Assembly of Psi(x, t) = f(x - d(t)) exp(i (phi1 x + phi0)) and closed-form references."""

from __future__ import annotations

import numpy as np

from ..core import Grid, UnitSystem, WaveFunction
from ..errors import SupportEscape
from ..specfun import airy_ai, sho_eigenfunction, sho_energy
from ..specs import MotionSpec, motion_eval
from .kinematics import PhaseTrack
from .shape import ShapeSolution

SUPPORT_FLOOR = 1e-6


def packet_values(
    shape: ShapeSolution,
    motion: MotionSpec,
    phase: PhaseTrack,
    x,
    t: float,
    units: UnitSystem = UnitSystem(),
) -> np.ndarray:
    """f(x - d(t)) exp(i (phi1 x + phi0)) at arbitrary points ``x``."""
    x = np.asarray(x, dtype=float)
    d, v, _ = (float(a) for a in motion_eval(motion, t, units))
    phi1 = units.mass * v / units.hbar
    phi0 = float(phase.phi0_at(t))
    return shape.evaluate(x - d) * np.exp(1j * (phi1 * x + phi0))


def assemble_packet(
    shape: ShapeSolution,
    motion: MotionSpec,
    phase: PhaseTrack,
    grid: Grid,
    t: float,
    units: UnitSystem = UnitSystem(),
) -> WaveFunction:
    if shape.normalizable:
        d = float(motion_eval(motion, t, units)[0])
        q_lo, q_hi = shape.support(SUPPORT_FLOOR)
        if q_lo + d <= grid.x[0] or q_hi + d >= grid.x[-1]:
            raise SupportEscape(
                f"packet support [{q_lo + d:.4g}, {q_hi + d:.4g}] leaves the grid at t={t:.6g}"
            )
    return WaveFunction(grid, packet_values(shape, motion, phase, grid.x, t, units), t)


def airy_values(B: float, x, t: float, units: UnitSystem = UnitSystem()) -> np.ndarray:
    """Closed-form free-space Airy packet at arbitrary points ``x``.

    Psi = Ai[(B / hbar^(2/3)) (x - B^3 t^2 / 4m^2)]
          * exp{i (B^3 t / 2 m hbar) (x - B^3 t^2 / 6 m^2)}
    """
    m, hbar = units.mass, units.hbar
    x = np.asarray(x, dtype=float)
    b3 = B**3
    arg = B / hbar ** (2.0 / 3.0) * (x - b3 * t * t / (4 * m * m))
    phase = b3 * t / (2 * m * hbar) * (x - b3 * t * t / (6 * m * m))
    return airy_ai(arg) * np.exp(1j * phase)


def airy_reference(B: float, grid: Grid, t: float, units: UnitSystem = UnitSystem()) -> WaveFunction:
    return WaveFunction(grid, airy_values(B, grid.x, t, units), t)


def sho_reference(
    n: int,
    x0: float,
    omega: float,
    grid: Grid,
    t: float,
    units: UnitSystem = UnitSystem(),
) -> WaveFunction:
    """Displaced oscillator eigenstate moving along d = x0 sin(omega t)."""
    m, hbar = units.mass, units.hbar
    x = grid.x
    d = x0 * np.sin(omega * t)
    phi1 = m * omega * x0 / hbar * np.cos(omega * t)
    phi0 = -m * omega * x0**2 / (4 * hbar) * np.sin(2 * omega * t) - sho_energy(n, units, omega) * t / hbar
    values = sho_eigenfunction(n, x - d, units, omega) * np.exp(1j * (phi1 * x + phi0))
    return WaveFunction(grid, values, t)


def gaussian_packet(grid: Grid, sigma: float, x0: float = 0.0, k0: float = 0.0) -> WaveFunction:
    """Unit-norm Gaussian with density width sigma (|psi|^2 has variance sigma^2)."""
    x = grid.x
    amp = (2.0 * np.pi * sigma**2) ** -0.25
    return WaveFunction(grid, amp * np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x), 0.0)
