"""Verification metrics for propagated packets.

Shape invariance, the flux identity j = d' |Psi|^2, phase linearity, the
energy expectation and the Schrodinger residual, all restricted to a
central analysis window so boundary effects stay out of the scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constructor.shape import ShapeSolution
from .core import UnitSystem, WaveFunction, first_derivative, norm_squared, second_derivative, trapezoid
from .errors import ComplexPotential, GridMismatch, InsufficientSnapshots, InsufficientSupport, SupportEscape
from .propagator import Snapshot
from .specs import MotionSpec, PotentialSpec, is_real, motion_eval, potential_real, potential_value
from .tridiag import compact_hamiltonian_apply, kinetic_scale

EDGE_DENSITY_LIMIT = 1e-4
MIN_PHASE_POINTS = 8


@dataclass(frozen=True)
class AnalysisWindow:
    fraction: float = 0.6
    density_floor: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError("window fraction must lie in (0, 1]")
        if not 0.0 <= self.density_floor < 1.0:
            raise ValueError("density_floor must lie in [0, 1)")

    def mask(self, grid) -> np.ndarray:
        m = grid.window_mask(self.fraction)
        # keep the Dirichlet endpoints out even for fraction = 1
        m[0] = m[-1] = False
        return m


@dataclass(frozen=True, eq=False)
class InvarianceMetrics:
    """Per-snapshot scores; ``centroid_err`` holds peak offsets for Airy shapes."""

    t: np.ndarray
    shape_err_L2: np.ndarray
    shape_err_Linf: np.ndarray
    centroid_err: np.ndarray
    norm: np.ndarray
    flux_residual: np.ndarray
    phase_residual: np.ndarray
    centroid_kind: str = "mean"


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    potential: float
    total: float
    E_n_reference: float = float("nan")
    E_cl_reference: float = float("nan")

    @property
    def reference_total(self) -> float:
        return self.E_n_reference + self.E_cl_reference


def _central_derivative(y: np.ndarray, dx: float) -> np.ndarray:
    # five-point central stencil inside, three-point one-sided near the ends
    out = first_derivative(y, dx)
    out[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * dx)
    return out


def probability_current(psi: WaveFunction, units: UnitSystem = UnitSystem()) -> np.ndarray:
    """j = (hbar/m) Im(conj(psi) d psi/dx) with fourth-order central differences."""
    dpsi = _central_derivative(psi.values, psi.grid.dx)
    return units.hbar / units.mass * np.imag(np.conj(psi.values) * dpsi)


def _peak_location(x: np.ndarray, rho: np.ndarray) -> float:
    i = int(np.argmax(rho))
    if 0 < i < rho.size - 1:
        y0, y1, y2 = rho[i - 1], rho[i], rho[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            return float(x[i] + 0.5 * (y0 - y2) / denom * (x[1] - x[0]))
    return float(x[i])


def phase_linearity(psi: WaveFunction, window: AnalysisWindow = AnalysisWindow()) -> tuple[float, float, float]:
    """Fit arg(psi) = slope x + intercept over the well-populated part of the window.

    The phase of psi**2 is unwrapped and halved, which removes the pi jumps
    at nodes of a real shape. The fit is weighted by density. The intercept
    branch is chosen so that Re(psi e^{-i(slope x + intercept)}) > 0 at the
    density maximum, matching the shape sign convention.
    """
    grid = psi.grid
    m = window.mask(grid)
    rho = psi.density
    peak = rho[m].max() if np.any(m) else 0.0
    sel = m & (rho >= window.density_floor * peak) & (rho > 0.0)
    if np.count_nonzero(sel) < MIN_PHASE_POINTS:
        raise InsufficientSupport(f"only {np.count_nonzero(sel)} points above the density floor")
    x = grid.x[sel]
    w = rho[sel]
    phase = 0.5 * np.unwrap(np.angle(psi.values[sel] ** 2))
    xm = np.sum(w * x) / np.sum(w)
    pm = np.sum(w * phase) / np.sum(w)
    slope = float(np.sum(w * (x - xm) * (phase - pm)) / np.sum(w * (x - xm) ** 2))
    intercept = float(pm - slope * xm)
    resid = phase - (slope * x + intercept)
    rms = float(np.sqrt(np.sum(w * resid**2) / np.sum(w)))
    ipk = int(np.argmax(w))
    if np.real(psi.values[sel][ipk] * np.exp(-1j * (slope * x[ipk] + intercept))) < 0.0:
        intercept += np.pi
    intercept = float(np.angle(np.exp(1j * intercept)))
    return slope, intercept, rms


def invariance_metrics(
    snapshots: Sequence[Snapshot],
    shape: ShapeSolution,
    motion: MotionSpec,
    window: AnalysisWindow = AnalysisWindow(),
    units: UnitSystem = UnitSystem(),
) -> InvarianceMetrics:
    """Score each snapshot against the rigid translate f(x - d(t))**2."""
    if not snapshots:
        raise ValueError("no snapshots to analyse")
    grid = snapshots[0].wavefunction.grid
    m = window.mask(grid)
    idx = np.nonzero(m)[0]
    x = grid.x
    xw = x[m]
    dx = grid.dx
    if shape.normalizable:
        q_ref = shape.mean_position()
        kind = "mean"
    else:
        q_ref = shape.peak_position()
        kind = "peak"
    cols = {k: [] for k in ("t", "L2", "Linf", "cen", "norm", "flux", "phase")}
    for snap in snapshots:
        psi = snap.wavefunction
        if psi.grid != grid:
            raise GridMismatch("snapshots must share one grid")
        t = psi.time
        d, v, _ = (float(a) for a in motion_eval(motion, t, units))
        rho = psi.density
        ref = shape.evaluate(xw - d) ** 2
        peak = float(ref.max())
        if shape.normalizable:
            edge = max(rho[idx[0]], rho[idx[-1]])
            if edge > EDGE_DENSITY_LIMIT * peak:
                raise SupportEscape(f"density at the analysis-window edge is {edge / peak:.2e} of peak at t={t:.6g}")
        diff = rho[m] - ref
        cols["t"].append(t)
        cols["Linf"].append(float(np.max(np.abs(diff))) / peak)
        cols["L2"].append(float(np.sqrt(np.sum(diff**2) / np.sum(ref**2))))
        if shape.normalizable:
            mean = float(trapezoid(x * rho, dx) / trapezoid(rho, dx))
            cols["cen"].append(mean - d - q_ref)
        else:
            cols["cen"].append(_peak_location(xw, rho[m]) - d - q_ref)
        cols["norm"].append(norm_squared(psi))
        j = probability_current(psi, units)
        cols["flux"].append(float(np.max(np.abs(j[m] - v * rho[m]))))
        cols["phase"].append(phase_linearity(psi, window)[2])
    arr = {k: np.asarray(val, dtype=float) for k, val in cols.items()}
    return InvarianceMetrics(
        arr["t"], arr["L2"], arr["Linf"], arr["cen"], arr["norm"], arr["flux"], arr["phase"], kind
    )


def energy_expectation(
    psi: WaveFunction,
    pot: PotentialSpec,
    t: float,
    units: UnitSystem = UnitSystem(),
    E_n_reference: float = float("nan"),
    E_cl_reference: float = float("nan"),
) -> EnergyReport:
    """<H> / <psi|psi> with the same compact kinetic operator the propagator uses."""
    if not is_real(pot):
        raise ComplexPotential("energy expectation needs a real potential")
    grid = psi.grid
    dx = grid.dx
    c = kinetic_scale(dx, units.hbar, units.mass)
    kin_psi = compact_hamiltonian_apply(psi.values, np.zeros(grid.n_points), c)
    inner = psi.values[1:-1]
    nrm = float(np.sum(np.abs(inner) ** 2) * dx)
    kinetic = float(np.real(np.vdot(inner, kin_psi[1:-1])) * dx) / nrm
    v = potential_real(pot, grid.x, t, units)
    potential = float(np.sum(v[1:-1] * np.abs(inner) ** 2) * dx) / nrm
    return EnergyReport(kinetic, potential, kinetic + potential, float(E_n_reference), float(E_cl_reference))


def position_moments(psi: WaveFunction) -> tuple[float, float]:
    """Mean and variance of |psi|^2 (trapezoid rule)."""
    x, rho, dx = psi.grid.x, psi.density, psi.grid.dx
    n = trapezoid(rho, dx)
    mean = trapezoid(x * rho, dx) / n
    return float(mean), float(trapezoid((x - mean) ** 2 * rho, dx) / n)


def residual_triple(
    prev: WaveFunction,
    cur: WaveFunction,
    nxt: WaveFunction,
    pot: PotentialSpec,
    units: UnitSystem = UnitSystem(),
    window: AnalysisWindow = AnalysisWindow(),
) -> float:
    """Relative windowed residual of i hbar Psi_t + (hbar^2/2m) Psi_xx - V Psi at ``cur``.

    Psi_t is the centered difference of ``prev`` and ``nxt``. The norm of the
    residual is divided by the sum of the norms of the three terms.
    """
    h = 0.5 * (nxt.time - prev.time)
    if h <= 0.0:
        raise ValueError("snapshot triple must be ordered in time")
    hbar, mass = units.hbar, units.mass
    m = window.mask(cur.grid)
    dt_term = 1j * hbar * (nxt.values - prev.values) / (2.0 * h)
    kin = hbar**2 / (2.0 * mass) * second_derivative(cur)
    pv = potential_value(pot, cur.grid.x, cur.time, units) * cur.values
    res = dt_term + kin - pv
    scale = np.linalg.norm(dt_term[m]) + np.linalg.norm(kin[m]) + np.linalg.norm(pv[m])
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(res[m]) / scale)


def schrodinger_residual(
    snapshots: Sequence[Snapshot],
    pot: PotentialSpec,
    units: UnitSystem = UnitSystem(),
    window: AnalysisWindow = AnalysisWindow(),
) -> float:
    """Largest relative residual over interior snapshots (uniform spacing required)."""
    if len(snapshots) < 3:
        raise InsufficientSnapshots("the residual needs at least 3 snapshots")
    times = np.array([s.wavefunction.time for s in snapshots])
    gaps = np.diff(times)
    if np.ptp(gaps) > 1e-9 * max(1.0, abs(gaps[0])):
        raise ValueError("snapshots must be uniformly spaced in time")
    return max(
        residual_triple(a.wavefunction, b.wavefunction, c.wavefunction, pot, units, window)
        for a, b, c in zip(snapshots[:-2], snapshots[1:-1], snapshots[2:])
    )
