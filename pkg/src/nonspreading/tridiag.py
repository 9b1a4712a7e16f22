"""Tridiagonal kernels shared by the shape eigen-solver and the propagator.

Both use the compact fourth-order (Numerov) form of the Hamiltonian on the
interior of a Dirichlet grid::

    H = B^{-1} K + V,   K = (hbar^2 / 2 m dx^2) tridiag(-1, 2, -1),
                        B = tridiag(1, 10, 1) / 12

so that ``B H = K + B V`` is tridiagonal. ``B^{-1} K`` is symmetric because
``B`` and ``K`` commute, hence ``H`` is Hermitian for real ``V`` and the
Crank-Nicolson map built from it is exactly unitary.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import SolverBreakdown

B_DIAG = 10.0 / 12.0
B_OFF = 1.0 / 12.0
PIVOT_FLOOR = 1e-300


@njit(cache=True)
def _thomas(lower, diag, upper, rhs):
    n = diag.shape[0]
    c = np.empty(n, dtype=np.complex128)
    d = np.empty(n, dtype=np.complex128)
    pivot = diag[0]
    if abs(pivot) < PIVOT_FLOOR:
        return d, 0
    c[0] = upper[0] / pivot if n > 1 else 0.0
    d[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - lower[i - 1] * c[i - 1]
        if abs(pivot) < PIVOT_FLOOR:
            return d, i
        if i < n - 1:
            c[i] = upper[i] / pivot
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        d[i] -= c[i] * d[i + 1]
    return d, -1


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system without pivoting.

    ``lower`` and ``upper`` have length ``n - 1``; ``lower[i]`` multiplies
    ``x[i]`` in row ``i + 1`` and ``upper[i]`` multiplies ``x[i + 1]`` in row ``i``.
    """
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    lower = np.ascontiguousarray(np.broadcast_to(lower, (diag.size - 1,)), dtype=np.complex128)
    upper = np.ascontiguousarray(np.broadcast_to(upper, (diag.size - 1,)), dtype=np.complex128)
    rhs = np.ascontiguousarray(rhs, dtype=np.complex128)
    x, bad = _thomas(lower, diag, upper, rhs)
    if bad >= 0:
        raise SolverBreakdown(f"tridiagonal pivot vanished at row {bad}")
    return x


def kinetic_scale(dx: float, hbar: float, mass: float) -> float:
    return hbar**2 / (2.0 * mass * dx**2)


def apply_b(y: np.ndarray, left=0.0, right=0.0) -> np.ndarray:
    """``B y`` on interior samples, with boundary values ``left``/``right``."""
    out = B_DIAG * y
    out[1:] += B_OFF * y[:-1]
    out[:-1] += B_OFF * y[1:]
    out[0] += B_OFF * left
    out[-1] += B_OFF * right
    return out


def apply_bh(y, v, c, left=0.0, right=0.0, v_left=0.0, v_right=0.0):
    """``(K + B V) y`` on interior samples.

    ``v`` holds the potential at the interior points; ``v_left``/``v_right``
    at the two boundary points, which enter through the B-weighted term.
    """
    vy = v * y
    out = 2.0 * c * y + B_DIAG * vy
    out[1:] += -c * y[:-1] + B_OFF * vy[:-1]
    out[:-1] += -c * y[1:] + B_OFF * vy[1:]
    out[0] += -c * left + B_OFF * v_left * left
    out[-1] += -c * right + B_OFF * v_right * right
    return out


def compact_hamiltonian_apply(values: np.ndarray, v_full: np.ndarray, c: float) -> np.ndarray:
    """``H y = B^{-1}(K + B V) y`` with zero Dirichlet data.

    Endpoint samples are ignored (taken as zero); the result is zero there.
    """
    y = np.asarray(values[1:-1], dtype=np.complex128)
    bh = apply_bh(y, v_full[1:-1], c)
    n = y.size
    hy = thomas_solve(np.full(n - 1, B_OFF), np.full(n, B_DIAG), np.full(n - 1, B_OFF), bh)
    out = np.zeros(len(values), dtype=np.complex128)
    out[1:-1] = hy
    return out


@njit(cache=True)
def _sturm_count(v, c, lam):
    # Leading-minor pivots of (K + B V) - lam B; the Numerov weights
    # 1 - (v - lam)/(12 c) must stay positive for the count to be valid.
    n = v.shape[0]
    count = 0
    p = 2.0 * c + B_DIAG * (v[0] - lam)
    if p < 0.0:
        count += 1
    for i in range(1, n):
        off_lo = -c + B_OFF * (v[i - 1] - lam)
        off_up = -c + B_OFF * (v[i] - lam)
        if p == 0.0:
            p = 1e-300
        p = 2.0 * c + B_DIAG * (v[i] - lam) - off_lo * off_up / p
        if p < 0.0:
            count += 1
    return count


def sturm_count(v_interior: np.ndarray, c: float, lam: float) -> int:
    """Number of compact-operator eigenvalues below ``lam``."""
    return int(_sturm_count(np.ascontiguousarray(v_interior, dtype=np.float64), float(c), float(lam)))


def numerov_weights_positive(v_interior: np.ndarray, c: float, lam: float) -> bool:
    return bool(np.all(1.0 - (v_interior - lam) / (12.0 * c) > 0.0))


def dense_compact_hamiltonian(v_interior: np.ndarray, c: float) -> np.ndarray:
    """Dense symmetric ``B^{-1} K + V``; reference path for small grids only."""
    n = v_interior.size
    k = np.diag(np.full(n, 2.0 * c)) + np.diag(np.full(n - 1, -c), 1) + np.diag(np.full(n - 1, -c), -1)
    b = np.diag(np.full(n, B_DIAG)) + np.diag(np.full(n - 1, B_OFF), 1) + np.diag(np.full(n - 1, B_OFF), -1)
    t = np.linalg.solve(b, k)
    t = 0.5 * (t + t.T)
    return t + np.diag(v_interior)
