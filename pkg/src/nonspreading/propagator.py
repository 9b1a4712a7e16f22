"""Crank-Nicolson time evolution with the compact fourth-order Hamiltonian.

One step solves::

    (B + i dt/2hbar (K + B V)) psi' = (B - i dt/2hbar (K + B V)) psi

on the interior points, with V taken at the mid-time t + dt/2. For real V
the map is exactly unitary. A spatially uniform imaginary part of V (a
``ComplexAbsorber`` over a real base) commutes with everything else and is
applied as the exact scalar factor exp(Im(V) dt / hbar).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .core import UnitSystem, WaveFunction
from .errors import DirichletViolation, SolverBreakdown
from .specs import PotentialSpec, potential_value, uniform_imaginary_part
from .tridiag import B_DIAG, B_OFF, PIVOT_FLOOR, kinetic_scale

DIRICHLET_TOL = 1e-8
STEP_TOL = 1e-9

BoundaryFn = Callable[[float], tuple[complex, complex]]


@dataclass(frozen=True)
class PropagationPlan:
    dt: float
    t_final: float
    snapshot_stride: int
    potential: PotentialSpec
    units: UnitSystem = UnitSystem()

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_final >= 0:
            raise ValueError("t_final must be non-negative")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be an integer >= 1")
        n = self.t_final / self.dt
        if abs(n - round(n)) > STEP_TOL * max(1.0, n):
            raise ValueError(f"t_final={self.t_final} is not a whole number of steps dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class Snapshot:
    wavefunction: WaveFunction
    step_index: int

    @property
    def time(self) -> float:
        return self.wavefunction.time


@njit(cache=True)
def _cn_kernel(psi, v, c, r, left_new, right_new):
    # Row i of (K + B V) couples y[i-1], y[i], y[i+1] with weights
    # (-c + v[i-1]/12), (2c + 10 v[i]/12), (-c + v[i+1]/12).
    n = psi.shape[0]
    m = n - 2
    out = np.empty(n, dtype=np.complex128)
    out[0] = left_new
    out[n - 1] = right_new
    cp = np.empty(m, dtype=np.complex128)
    dp = np.empty(m, dtype=np.complex128)
    prev_c = 0.0 + 0.0j
    prev_d = 0.0 + 0.0j
    for k in range(m):
        i = k + 1
        a_lo = -c + B_OFF * v[i - 1]
        a_di = 2.0 * c + B_DIAG * v[i]
        a_up = -c + B_OFF * v[i + 1]
        lo_l = B_OFF + r * a_lo
        di_l = B_DIAG + r * a_di
        up_l = B_OFF + r * a_up
        rhs = (B_OFF - r * a_lo) * psi[i - 1] + (B_DIAG - r * a_di) * psi[i] + (B_OFF - r * a_up) * psi[i + 1]
        if k == 0:
            rhs -= lo_l * left_new
            pivot = di_l
            rhs_eff = rhs
        else:
            pivot = di_l - lo_l * prev_c
            rhs_eff = rhs - lo_l * prev_d
        if k == m - 1:
            rhs_eff -= up_l * right_new
        if abs(pivot) < PIVOT_FLOOR:
            return out, k
        prev_c = up_l / pivot
        prev_d = rhs_eff / pivot
        cp[k] = prev_c
        dp[k] = prev_d
    for k in range(m - 2, -1, -1):
        dp[k] -= cp[k] * dp[k + 1]
    for k in range(m):
        out[k + 1] = dp[k]
    return out, -1


def cn_step(
    psi: WaveFunction,
    pot: PotentialSpec,
    t: float,
    dt: float,
    units: UnitSystem = UnitSystem(),
    boundary: tuple[complex, complex] | None = None,
) -> WaveFunction:
    """Advance ``psi`` from t to t + dt.

    ``boundary`` gives the endpoint values at t + dt. By default they are
    zero (Dirichlet). A negative ``dt`` steps backwards and inverts the
    forward step taken from t + dt.
    """
    if dt == 0.0:
        raise ValueError("dt must be nonzero")
    x = psi.grid.x
    hbar = units.hbar
    gamma_rate = uniform_imaginary_part(pot)
    v = np.asarray(potential_value(pot, x, t + 0.5 * dt, units), dtype=np.complex128)
    if gamma_rate != 0.0:
        v = v - 1j * gamma_rate
    decay = np.exp(gamma_rate * dt / hbar)
    left, right = (0.0, 0.0) if boundary is None else boundary
    c = kinetic_scale(psi.grid.dx, hbar, units.mass)
    r = 1j * dt / (2.0 * hbar)
    out, bad = _cn_kernel(
        np.ascontiguousarray(psi.values, dtype=np.complex128),
        np.ascontiguousarray(v),
        c,
        r,
        complex(left) / decay,
        complex(right) / decay,
    )
    if bad >= 0:
        raise SolverBreakdown(f"Crank-Nicolson pivot vanished at interior row {bad}")
    if decay != 1.0:
        out *= decay
    return WaveFunction(psi.grid, out, psi.time + dt)


def check_dirichlet(psi: WaveFunction, tol: float = DIRICHLET_TOL) -> None:
    mag = np.abs(psi.values)
    peak = float(mag.max())
    if peak == 0.0:
        return
    edge = max(mag[0], mag[-1])
    if edge > tol * peak:
        raise DirichletViolation(
            f"endpoint amplitude {edge:.3e} exceeds {tol:g} of peak {peak:.3e}; widen the grid or waive"
        )


def propagate(
    psi0: WaveFunction,
    plan: PropagationPlan,
    on_snapshot: Callable[[Snapshot], None] | None = None,
    waive_dirichlet: bool = False,
    boundary: BoundaryFn | None = None,
) -> list[Snapshot]:
    """Step ``psi0`` to ``plan.t_final`` and collect snapshots.

    Snapshots are taken at step 0, every ``snapshot_stride`` steps and at the
    final step. ``boundary(t)`` supplies endpoint values for non-normalizable
    packets; it requires ``waive_dirichlet``.
    """
    if boundary is not None and not waive_dirichlet:
        raise ValueError("time-dependent boundary data requires waive_dirichlet=True")
    if not waive_dirichlet:
        check_dirichlet(psi0)
    n = plan.n_steps
    t0 = psi0.time
    snaps = []

    def record(psi, k):
        snap = Snapshot(psi, k)
        snaps.append(snap)
        if on_snapshot is not None:
            on_snapshot(snap)

    psi = psi0
    record(psi, 0)
    for k in range(1, n + 1):
        t = t0 + (k - 1) * plan.dt
        t_new = t0 + k * plan.dt
        bc = None if boundary is None else boundary(t_new)
        psi = cn_step(psi, plan.potential, t, plan.dt, plan.units, bc)
        # pin the clock to the lattice instead of accumulating dt
        psi = WaveFunction(psi.grid, psi.values, t_new)
        if k % plan.snapshot_stride == 0 or k == n:
            record(psi, k)
    return snaps
