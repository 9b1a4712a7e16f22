"""Closed-form potential families V(x, t) and packet motions d(t).

Every family is a frozen dataclass. ``potential_value`` and ``motion_eval``
are the evaluation entry points; ``*_from_dict`` / ``*_to_dict`` give the
JSON form used by scenario configs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .core import UnitSystem
from .errors import ConfigError, TimeOutOfRange

_LATTICE_RTOL = 1e-9


def _check_uniform_lattice(times: np.ndarray, what: str) -> None:
    if times.ndim != 1 or times.size < 4:
        raise ValueError(f"{what}: need at least 4 lattice times")
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise ValueError(f"{what}: times must be strictly increasing")
    if np.max(np.abs(steps - steps.mean())) > _LATTICE_RTOL * max(1.0, abs(times[-1])):
        raise ValueError(f"{what}: times must be uniformly spaced")


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _check_time(t, t0: float, t1: float) -> None:
    ta = np.asarray(t)
    slack = 1e-12 * max(1.0, abs(t1))
    if np.any(ta < t0 - slack) or np.any(ta > t1 + slack):
        raise TimeOutOfRange(f"t outside tabulated range [{t0}, {t1}]")


# ---------------------------------------------------------------- forces


@dataclass(frozen=True)
class ConstantForce:
    F0: float

    def value(self, t):
        return self.F0 * np.ones_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SinusoidForce:
    F0: float
    nu: float
    phase: float = 0.0

    def value(self, t):
        return self.F0 * np.sin(self.nu * np.asarray(t, dtype=float) + self.phase)


@dataclass(frozen=True, eq=False)
class TabulatedForce:
    """Force samples on a uniform time lattice, cubic-spline interpolated."""

    times: np.ndarray
    values: np.ndarray
    _spline: Any = field(init=False, repr=False)

    def __post_init__(self):
        times = _frozen_array(self.times)
        values = _frozen_array(self.values)
        if values.shape != times.shape:
            raise ValueError("tabulated force: times and values differ in length")
        _check_uniform_lattice(times, "tabulated force")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spline", CubicSpline(times, values))

    def value(self, t):
        _check_time(t, self.times[0], self.times[-1])
        return self._spline(t)


ForceSpec = Union[ConstantForce, SinusoidForce, TabulatedForce]


# ---------------------------------------------------------------- motions


@dataclass(frozen=True)
class Rest:
    pass


@dataclass(frozen=True)
class PolynomialMotion:
    """d(t) = sum_k coeffs[k] t^k, with coeffs[0] forced to zero."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs) or (0.0,)
        object.__setattr__(self, "coeffs", (0.0,) + c[1:])


@dataclass(frozen=True)
class SinusoidMotion:
    """d(t) = x0 [sin(omega t + phase) - sin(phase)]."""

    x0: float
    omega: float
    phase: float = 0.0


@dataclass(frozen=True)
class ConstantAccel:
    """Uniform acceleration B^3 / (2 m^2): d(t) = v0 t + B^3 t^2 / (4 m^2).

    The mass comes from the ``UnitSystem`` passed at evaluation time.
    """

    B: float
    v0: float = 0.0


@dataclass(frozen=True, eq=False)
class NumericMotion:
    """Sampled motion on a uniform lattice.

    ``d`` is shifted so that d(0) = 0. The acceleration samples must agree
    with the samples of ``d`` through the Numerov relation

        (d[i+1] - 2 d[i] + d[i-1]) / h^2 = (a[i-1] + 10 a[i] + a[i+1]) / 12

    to 1e-6 relative, which holds to O(h^4) for any smooth trajectory.
    """

    times: np.ndarray
    d: np.ndarray
    d_dot: np.ndarray
    d_ddot: np.ndarray
    _splines: Any = field(init=False, repr=False)

    def __post_init__(self):
        times = _frozen_array(self.times)
        d = np.array(self.d, dtype=np.float64)
        v = _frozen_array(self.d_dot)
        a = _frozen_array(self.d_ddot)
        if not (d.shape == v.shape == a.shape == times.shape):
            raise ValueError("numeric motion: arrays must share one length")
        _check_uniform_lattice(times, "numeric motion")
        if times[0] != 0.0:
            raise ValueError("numeric motion lattice must start at t = 0")
        d = d - d[0]
        d.setflags(write=False)
        h = times[1] - times[0]
        lhs = (d[2:] - 2 * d[1:-1] + d[:-2]) / h**2
        rhs = (a[:-2] + 10 * a[1:-1] + a[2:]) / 12
        scale = max(1.0, float(np.max(np.abs(a))))
        gap = float(np.max(np.abs(lhs - rhs)))
        if gap > 1e-6 * scale:
            raise ValueError(f"numeric motion: acceleration inconsistent with d (gap {gap:.3e})")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "d_dot", v)
        object.__setattr__(self, "d_ddot", a)
        object.__setattr__(
            self,
            "_splines",
            (CubicHermiteSpline(times, d, v), CubicHermiteSpline(times, v, a), CubicSpline(times, a)),
        )


MotionSpec = Union[Rest, PolynomialMotion, SinusoidMotion, ConstantAccel, NumericMotion]


def motion_eval(spec: MotionSpec, t, units: UnitSystem | None = None):
    """Return (d, d_dot, d_ddot) at time(s) t."""
    t = np.asarray(t, dtype=float)
    if isinstance(spec, Rest):
        z = np.zeros_like(t)
        return z, z.copy(), z.copy()
    if isinstance(spec, PolynomialMotion):
        p = np.polynomial.Polynomial(spec.coeffs)
        return p(t), p.deriv(1)(t), p.deriv(2)(t)
    if isinstance(spec, SinusoidMotion):
        arg = spec.omega * t + spec.phase
        x0, w = spec.x0, spec.omega
        return (
            x0 * (np.sin(arg) - math.sin(spec.phase)),
            x0 * w * np.cos(arg),
            -x0 * w * w * np.sin(arg),
        )
    if isinstance(spec, ConstantAccel):
        m = (units or UnitSystem()).mass
        acc = spec.B**3 / (2.0 * m * m)
        return spec.v0 * t + 0.5 * acc * t * t, spec.v0 + acc * t, acc * np.ones_like(t)
    if isinstance(spec, NumericMotion):
        _check_time(t, spec.times[0], spec.times[-1])
        sd, sv, sa = spec._splines
        return sd(t), sv(t), sa(t)
    raise TypeError(f"unknown motion spec {spec!r}")


# ------------------------------------------------------------- potentials


@dataclass(frozen=True)
class FreeSpace:
    pass


@dataclass(frozen=True)
class UniformForce:
    """V = -F(t) x."""

    force: ForceSpec


@dataclass(frozen=True)
class Harmonic:
    """V = m omega(t)^2 x^2 / 2 with omega(t) = omega0 (1 + omega_ramp t)."""

    omega0: float
    omega_ramp: float = 0.0


@dataclass(frozen=True)
class PowerLaw:
    """V = lam x^n, n >= 3."""

    lam: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"power-law exponent must be an integer >= 3, got {self.n}")


@dataclass(frozen=True)
class MovingHarmonicDriven:
    """Harmonic trap dragged along ``motion``.

    V = m w^2 (x - d)^2 / 2 - m x d'' - m w^2 x0^2 sin^2(w t) / 2, where
    ``offset_amplitude`` is x0 (default 0 switches the last term off).
    """

    omega: float
    motion: MotionSpec
    offset_amplitude: float = 0.0


@dataclass(frozen=True)
class MovingQuarticDriven:
    """V = lam (x - d)^4 - m x d''."""

    lam: float
    motion: MotionSpec


@dataclass(frozen=True)
class ComplexAbsorber:
    """``base`` plus the uniform imaginary part -i gamma."""

    base: "PotentialSpec"
    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("absorber gamma must be >= 0")


PotentialSpec = Union[
    FreeSpace, UniformForce, Harmonic, PowerLaw, MovingHarmonicDriven, MovingQuarticDriven, ComplexAbsorber
]


def is_real(spec: PotentialSpec) -> bool:
    return not isinstance(spec, ComplexAbsorber)


def potential_value(spec: PotentialSpec, x, t, units: UnitSystem = UnitSystem()):
    """Complex V(x, t); the imaginary part is zero except for absorbers."""
    if isinstance(spec, ComplexAbsorber):
        return potential_value(spec.base, x, t, units) - 1j * spec.gamma
    return _real_value(spec, x, t, units) + 0j


def potential_real(spec: PotentialSpec, x, t, units: UnitSystem = UnitSystem()) -> np.ndarray:
    """Real part of V(x, t) as a float array."""
    if isinstance(spec, ComplexAbsorber):
        return potential_real(spec.base, x, t, units)
    return _real_value(spec, x, t, units)


def uniform_imaginary_part(spec: PotentialSpec) -> float:
    """Total spatially uniform imaginary part (-sum of absorber gammas)."""
    if isinstance(spec, ComplexAbsorber):
        return uniform_imaginary_part(spec.base) - spec.gamma
    return 0.0


def _real_value(spec, x, t, units):
    x = np.asarray(x, dtype=float)
    m = units.mass
    if isinstance(spec, FreeSpace):
        return np.zeros_like(x + 0.0 * np.asarray(t, dtype=float))
    if isinstance(spec, UniformForce):
        return -spec.force.value(t) * x
    if isinstance(spec, Harmonic):
        w = spec.omega0 * (1.0 + spec.omega_ramp * np.asarray(t, dtype=float))
        return 0.5 * m * w * w * x * x
    if isinstance(spec, PowerLaw):
        return spec.lam * x**spec.n
    if isinstance(spec, MovingHarmonicDriven):
        d, _, a = motion_eval(spec.motion, t, units)
        w = spec.omega
        s = np.sin(w * np.asarray(t, dtype=float))
        return 0.5 * m * w * w * (x - d) ** 2 - m * x * a - 0.5 * m * w * w * spec.offset_amplitude**2 * s * s
    if isinstance(spec, MovingQuarticDriven):
        d, _, a = motion_eval(spec.motion, t, units)
        return spec.lam * (x - d) ** 4 - m * x * a
    raise TypeError(f"unknown potential spec {spec!r}")


# ------------------------------------------------------------- JSON forms


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing field '{key}'")
    return d[key]


def force_from_dict(d: dict) -> ForceSpec:
    kind = _require(d, "kind", "force")
    if kind == "constant":
        return ConstantForce(float(_require(d, "F0", "force")))
    if kind == "sinusoid":
        return SinusoidForce(float(_require(d, "F0", "force")), float(_require(d, "nu", "force")), float(d.get("phase", 0.0)))
    if kind == "tabulated":
        return TabulatedForce(np.asarray(_require(d, "times", "force")), np.asarray(_require(d, "values", "force")))
    raise ConfigError(f"unknown force kind '{kind}'")


def force_to_dict(f: ForceSpec) -> dict:
    if isinstance(f, ConstantForce):
        return {"kind": "constant", "F0": f.F0}
    if isinstance(f, SinusoidForce):
        return {"kind": "sinusoid", "F0": f.F0, "nu": f.nu, "phase": f.phase}
    return {"kind": "tabulated", "times": f.times.tolist(), "values": f.values.tolist()}


def motion_from_dict(d: dict) -> MotionSpec:
    kind = _require(d, "kind", "motion")
    if kind == "rest":
        return Rest()
    if kind == "polynomial":
        return PolynomialMotion(tuple(_require(d, "coeffs", "motion")))
    if kind == "sinusoid":
        return SinusoidMotion(float(_require(d, "x0", "motion")), float(_require(d, "omega", "motion")), float(d.get("phase", 0.0)))
    if kind == "constant_accel":
        return ConstantAccel(float(_require(d, "B", "motion")), float(d.get("v0", 0.0)))
    if kind == "numeric":
        return NumericMotion(*(np.asarray(_require(d, k, "motion")) for k in ("times", "d", "d_dot", "d_ddot")))
    raise ConfigError(f"unknown motion kind '{kind}'")


def motion_to_dict(m: MotionSpec) -> dict:
    if isinstance(m, Rest):
        return {"kind": "rest"}
    if isinstance(m, PolynomialMotion):
        return {"kind": "polynomial", "coeffs": list(m.coeffs)}
    if isinstance(m, SinusoidMotion):
        return {"kind": "sinusoid", "x0": m.x0, "omega": m.omega, "phase": m.phase}
    if isinstance(m, ConstantAccel):
        return {"kind": "constant_accel", "B": m.B, "v0": m.v0}
    return {
        "kind": "numeric",
        "times": m.times.tolist(),
        "d": m.d.tolist(),
        "d_dot": m.d_dot.tolist(),
        "d_ddot": m.d_ddot.tolist(),
    }


def potential_from_dict(d: dict) -> PotentialSpec:
    kind = _require(d, "kind", "potential")
    where = f"potential '{kind}'"
    if kind == "free_space":
        return FreeSpace()
    if kind == "uniform_force":
        return UniformForce(force_from_dict(_require(d, "force", where)))
    if kind == "harmonic":
        return Harmonic(float(_require(d, "omega0", where)), float(d.get("omega_ramp", 0.0)))
    if kind == "power_law":
        return PowerLaw(float(_require(d, "lambda", where)), int(_require(d, "n", where)))
    if kind == "moving_harmonic_driven":
        return MovingHarmonicDriven(
            float(_require(d, "omega", where)),
            motion_from_dict(_require(d, "motion", where)),
            float(d.get("offset_amplitude", 0.0)),
        )
    if kind == "moving_quartic_driven":
        return MovingQuarticDriven(float(_require(d, "lambda", where)), motion_from_dict(_require(d, "motion", where)))
    if kind == "complex_absorber":
        return ComplexAbsorber(potential_from_dict(_require(d, "base", where)), float(_require(d, "gamma", where)))
    raise ConfigError(f"unknown potential kind '{kind}'")


def potential_to_dict(p: PotentialSpec) -> dict:
    if isinstance(p, FreeSpace):
        return {"kind": "free_space"}
    if isinstance(p, UniformForce):
        return {"kind": "uniform_force", "force": force_to_dict(p.force)}
    if isinstance(p, Harmonic):
        return {"kind": "harmonic", "omega0": p.omega0, "omega_ramp": p.omega_ramp}
    if isinstance(p, PowerLaw):
        return {"kind": "power_law", "lambda": p.lam, "n": p.n}
    if isinstance(p, MovingHarmonicDriven):
        return {
            "kind": "moving_harmonic_driven",
            "omega": p.omega,
            "motion": motion_to_dict(p.motion),
            "offset_amplitude": p.offset_amplitude,
        }
    if isinstance(p, MovingQuarticDriven):
        return {"kind": "moving_quartic_driven", "lambda": p.lam, "motion": motion_to_dict(p.motion)}
    return {"kind": "complex_absorber", "base": potential_to_dict(p.base), "gamma": p.gamma}
