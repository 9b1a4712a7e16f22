"""Packet motion d(t) and the linear phase phi(x, t) = phi1(t) x + phi0(t)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from ..core import UnitSystem
from ..errors import ComplexPotential, TimeOutOfRange, UnsupportedPotential
from ..specs import (
    ConstantAccel,
    ConstantForce,
    ForceSpec,
    FreeSpace,
    Harmonic,
    MotionSpec,
    NumericMotion,
    PolynomialMotion,
    PotentialSpec,
    SinusoidMotion,
    UniformForce,
    is_real,
    motion_eval,
    potential_real,
)

log = logging.getLogger(__name__)

IDENTITY_TOL = 1e-8


def time_lattice(t_final: float, dt: float) -> np.ndarray:
    steps = int(round(t_final / dt))
    if steps < 1 or abs(steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError(f"t_final={t_final} is not an integer number of steps of {dt}")
    return dt * np.arange(steps + 1)


def _check_lattice(times: np.ndarray) -> float:
    if times.ndim != 1 or times.size < 3:
        raise ValueError("time lattice needs at least 3 points")
    if times[0] != 0.0:
        raise ValueError("time lattice must start at t = 0")
    h = np.diff(times)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * max(1.0, times[-1]):
        raise ValueError("time lattice must be uniform and increasing")
    return float(times[1] - times[0])


def cumulative(y: np.ndarray, h: float) -> np.ndarray:
    """Running integral from t = 0 by composite Simpson (0 at the first point)."""
    return cumulative_simpson(y, dx=h, initial=0.0)


@dataclass(frozen=True, eq=False)
class PhaseTrack:
    """Motion and phase sampled on a uniform time lattice starting at 0."""

    times: np.ndarray
    d: np.ndarray
    d_dot: np.ndarray
    d_ddot: np.ndarray
    phi1: np.ndarray
    phi0: np.ndarray
    E_eff_used: float
    _phi0_spline: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        for name in ("times", "d", "d_dot", "d_ddot", "phi1", "phi0"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_phi0_spline", CubicSpline(self.times, self.phi0))

    def phi0_at(self, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, self.times[-1])
        if np.any(t_arr < -slack) or np.any(t_arr > self.times[-1] + slack):
            raise TimeOutOfRange(f"t={t} outside phase lattice [0, {self.times[-1]}]")
        return self._phi0_spline(t_arr)


def _rk4(accel, times: np.ndarray, v0: float):
    """Integrate d'' = accel(t, d, v) on the lattice; returns d, v, a arrays."""
    h = _check_lattice(times)
    n = times.size
    d = np.zeros(n)
    v = np.zeros(n)
    v[0] = v0
    for i in range(n - 1):
        t = times[i]
        k1x, k1v = v[i], accel(t, d[i], v[i])
        k2x, k2v = v[i] + 0.5 * h * k1v, accel(t + 0.5 * h, d[i] + 0.5 * h * k1x, v[i] + 0.5 * h * k1v)
        k3x, k3v = v[i] + 0.5 * h * k2v, accel(t + 0.5 * h, d[i] + 0.5 * h * k2x, v[i] + 0.5 * h * k2v)
        k4x, k4v = v[i] + h * k3v, accel(t + h, d[i] + h * k3x, v[i] + h * k3v)
        d[i + 1] = d[i] + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v[i + 1] = v[i] + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    a = np.array([accel(t, x, u) for t, x, u in zip(times, d, v)])
    return d, v, a


def motion_from_constraint(
    pot: PotentialSpec,
    params: dict | None = None,
    d0: float = 0.0,
    v0: float = 0.0,
    times=None,
    units: UnitSystem = UnitSystem(),
) -> MotionSpec:
    """Motion that keeps V_eff time independent.

    ``params`` may carry ``B`` (free space / uniform force: the constant
    linear coefficient B^3/2m of V_eff) or ``offset`` (harmonic: the constant
    in d'' + omega^2 d = offset). Closed forms are returned where they exist;
    otherwise RK4 on ``times`` with step equal to the lattice spacing.
    """
    params = params or {}
    if d0 != 0.0:
        raise ValueError("packets start at d(0) = 0; shift the grid instead of d0")
    m = units.mass
    if isinstance(pot, FreeSpace):
        return ConstantAccel(float(params.get("B", 0.0)), v0)
    if isinstance(pot, UniformForce):
        B = float(params.get("B", 0.0))
        bias = B**3 / (2.0 * m)
        if isinstance(pot.force, ConstantForce):
            return PolynomialMotion((0.0, v0, 0.5 * (pot.force.F0 + bias) / m))
        if times is None:
            raise ValueError("a time lattice is required for a time-dependent force")
        times = np.asarray(times, dtype=float)
        force = pot.force
        d, v, a = _rk4(lambda t, x, u: (float(force.value(t)) + bias) / m, times, v0)
        return NumericMotion(times, d, v, a)
    if isinstance(pot, Harmonic):
        if pot.omega_ramp != 0.0:
            raise UnsupportedPotential("no packet motion keeps V_eff fixed for a time-dependent frequency")
        w = pot.omega0
        offset = float(params.get("offset", 0.0))
        if offset == 0.0:
            return SinusoidMotion(v0 / w, w)
        if times is None:
            raise ValueError("a time lattice is required for a shifted oscillation")
        times = np.asarray(times, dtype=float)
        d, v, a = _rk4(lambda t, x, u: offset - w * w * x, times, v0)
        return NumericMotion(times, d, v, a)
    raise UnsupportedPotential(f"no motion constraint is known for {type(pot).__name__}")


def build_phase(
    pot: PotentialSpec,
    motion: MotionSpec,
    E_eff: float,
    times,
    units: UnitSystem = UnitSystem(),
) -> PhaseTrack:
    """phi1 = m d'/hbar and hbar phi0' = -E_eff - V(d, t) - m d'^2/2 - m d d''."""
    if not is_real(pot):
        raise ComplexPotential("phase construction needs a real potential")
    times = np.asarray(times, dtype=float)
    h = _check_lattice(times)
    m, hbar = units.mass, units.hbar
    d, v, a = (np.asarray(arr, dtype=float) * np.ones_like(times) for arr in motion_eval(motion, times, units))
    vd = potential_real(pot, d, times, units)
    rate = (-E_eff - vd - 0.5 * m * v * v - m * d * a) / hbar
    return PhaseTrack(times, d, v, a, m * v / hbar, cumulative(rate, h), float(E_eff))


def force_double_integrals(force: ForceSpec, times) -> tuple[np.ndarray, np.ndarray]:
    """Return int_0^t int_0^tau F two ways: nested, and as int_0^t (t - tau) F."""
    times = np.asarray(times, dtype=float)
    h = _check_lattice(times)
    F = np.asarray(force.value(times), dtype=float) * np.ones_like(times)
    i1 = cumulative(F, h)
    nested = cumulative(i1, h)
    identity = times * i1 - cumulative(times * F, h)
    return nested, identity


def uniform_force_track(
    force: ForceSpec,
    B: float,
    times,
    units: UnitSystem = UnitSystem(),
) -> PhaseTrack:
    """Closed-form-by-quadrature track for V = -F(t) x (zero initial velocity).

    d    = B^3 t^2 / 4m^2 + (1/m) II[F]
    phi1 = B^3 t / 2m hbar + (1/hbar) I[F]
    phi0 = -B^6 t^3 / 12 m^3 hbar - (1/2m hbar) I[(I F)^2]
           - (B^3 / 2 m^2 hbar) (I[tau I F] + I[II F])

    with I the running integral from 0. The nested double integral is
    cross-checked against the single-integral form int (t - tau) F dtau.
    """
    times = np.asarray(times, dtype=float)
    h = _check_lattice(times)
    m, hbar = units.mass, units.hbar
    F = np.asarray(force.value(times), dtype=float) * np.ones_like(times)
    b3 = B**3
    i1 = cumulative(F, h)
    i2, i2_identity = force_double_integrals(force, times)
    gap = float(np.max(np.abs(i2 - i2_identity)))
    if gap > IDENTITY_TOL * max(1.0, float(np.max(np.abs(i2)))):
        log.warning("double-integral identity gap %.3e exceeds %.1e", gap, IDENTITY_TOL)
    t = times
    d = b3 * t * t / (4 * m * m) + i2 / m
    d_dot = b3 * t / (2 * m * m) + i1 / m
    d_ddot = (F + b3 / (2 * m)) / m
    phi1 = m * d_dot / hbar
    phi0 = (
        -(b3 * b3) * t**3 / (12 * m**3 * hbar)
        - cumulative(i1 * i1, h) / (2 * m * hbar)
        - b3 / (2 * m * m * hbar) * (cumulative(t * i1, h) + cumulative(i2, h))
    )
    return PhaseTrack(times, d, d_dot, d_ddot, phi1, phi0, 0.0)
