"""Embedded property suite run by ``nonspreading selfcheck``.

Every check is deterministic: fixed grids, fixed packets, no random draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from . import tridiag
from .constructor.effective import effective_potential
from .constructor.shape import solve_shape
from .core import WaveFunction, make_grid, norm_squared
from .propagator import cn_step
from .specfun import AI0, AIP0, airy_ai, sho_eigenfunction
from .specs import Harmonic, PowerLaw, Rest


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.limit)


def _airy_at_zero() -> float:
    return abs(float(airy_ai(0.0)) - AI0)


def _airy_ode() -> float:
    # Ai'' = x Ai by a fourth-order difference; also Ai'(0) from the same stencil
    x = np.linspace(-8.0, 4.0, 1201)
    step = x[1] - x[0]
    xs = np.concatenate(([x[0] - 2 * step, x[0] - step], x, [x[-1] + step, x[-1] + 2 * step]))
    y = airy_ai(xs)
    d2 = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * step**2)
    ode = float(np.max(np.abs(d2 - x * y[2:-2])))
    i0 = int(np.argmin(np.abs(x)))
    d1 = (y[i0] - 8 * y[i0 + 1] + 8 * y[i0 + 3] - y[i0 + 4]) / (12 * step)
    return max(ode, abs(d1 - AIP0))


def _hermite_orthonormality() -> float:
    x = np.linspace(-20.0, 20.0, 8001)
    psi = np.array([sho_eigenfunction(n, x) for n in range(11)])
    gram = trapezoid(psi[:, None, :] * psi[None, :, :], x, axis=-1)
    return float(np.max(np.abs(gram - np.eye(11))))


def _cn_unitarity() -> float:
    grid = make_grid(-20.0, 20.0, 1024)
    x = grid.x
    psi = WaveFunction(grid, np.exp(-((x - 2.0) ** 2) + 1.5j * x) * (2 / np.pi) ** 0.25)
    n0 = norm_squared(psi)
    pot = Harmonic(0.5)
    for k in range(1000):
        psi = cn_step(psi, pot, k * 1e-3, 1e-3)
    return abs(norm_squared(psi) - n0) / n0


def _cn_stationary() -> float:
    grid = make_grid(-12.0, 12.0, 512)
    shape = solve_shape(effective_potential(Harmonic(1.0), Rest(), grid, 0.0))[0]
    psi0 = WaveFunction(grid, shape.f)
    psi = psi0
    for k in range(100):
        psi = cn_step(psi, Harmonic(1.0), k * 1e-2, 1e-2)
    return float(np.max(np.abs(psi.density - psi0.density)))


def _eigen_vs_dense(pot) -> float:
    grid = make_grid(-6.0, 6.0, 256)
    veff = effective_potential(pot, Rest(), grid, 0.0)
    k = 6
    found = np.array([s.E_eff for s in solve_shape(veff, k)])
    c = tridiag.kinetic_scale(grid.dx, 1.0, 1.0)
    dense = np.linalg.eigvalsh(tridiag.dense_compact_hamiltonian(veff.samples[1:-1], c))[:k]
    return float(np.max(np.abs(found - dense) / np.abs(dense)))


def _node_counts() -> float:
    grid = make_grid(-10.0, 10.0, 1024)
    shapes = solve_shape(effective_potential(Harmonic(1.0), Rest(), grid, 0.0), 8)
    return float(sum(s.node_count != i for i, s in enumerate(shapes)))


CHECKS: list[tuple[str, Callable[[], float], float]] = [
    ("specfun: Ai(0) against the Gamma-function value", _airy_at_zero, 1e-14),
    ("specfun: Ai'' = x Ai on [-8, 4]", _airy_ode, 1e-6),
    ("specfun: Hermite functions orthonormal, n <= 10", _hermite_orthonormality, 1e-12),
    ("propagator: CN norm drift over 1000 steps", _cn_unitarity, 1e-12),
    ("propagator: ground state density held for 100 steps", _cn_stationary, 1e-10),
    ("shape: SHO eigenvalues vs dense oracle (256 points)", lambda: _eigen_vs_dense(Harmonic(1.0)), 1e-10),
    ("shape: quartic eigenvalues vs dense oracle (256 points)", lambda: _eigen_vs_dense(PowerLaw(1.0, 4)), 1e-10),
    ("shape: node count equals eigen-index, n < 8", _node_counts, 0.0),
]


def run_checks() -> list[CheckResult]:
    out = []
    for name, fn, limit in CHECKS:
        try:
            value = float(fn())
        except Exception:  # a crashing check is a failing check
            value = float("inf")
        out.append(CheckResult(name, value, limit))
    return out


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'value':>10}  {'limit':>8}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.value:>10.3e}  {r.limit:>8.1e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
