import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonspreading.core import (
    Grid,
    UnitSystem,
    WaveFunction,
    first_derivative,
    inner_product,
    make_grid,
    norm_squared,
    second_derivative,
    trapezoid,
)
from nonspreading.errors import GridMismatch, InvalidGrid


def test_unit_system_defaults_and_validation():
    u = UnitSystem()
    assert (u.hbar, u.mass) == (1.0, 1.0)
    with pytest.raises(ValueError):
        UnitSystem(hbar=0.0)
    with pytest.raises(ValueError):
        UnitSystem(mass=-1.0)


def test_grid_spacing_and_endpoints():
    g = make_grid(0.0, 15.0, 16)
    assert g.dx == 1.0
    assert g.x[0] == 0.0 and g.x[-1] == 15.0
    g = make_grid(-1.0, 1.0, 17)
    assert g.dx == pytest.approx(0.125)
    assert g.x[8] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("args", [(1.0, 0.0, 32), (0.0, 1.0, 15), (0.0, np.inf, 32), (0.0, 1.0, 20.5)])
def test_invalid_grids(args):
    with pytest.raises(InvalidGrid):
        Grid(*args)


def test_grid_x_is_read_only():
    g = make_grid(-1.0, 1.0, 33)
    with pytest.raises(ValueError):
        g.x[0] = 3.0


def test_wavefunction_checks():
    g = make_grid(-1.0, 1.0, 33)
    with pytest.raises(GridMismatch):
        WaveFunction(g, np.zeros(32))
    with pytest.raises(ValueError):
        WaveFunction(g, np.full(33, np.nan))
    psi = WaveFunction(g, np.ones(33))
    assert psi.values.dtype == np.complex128
    with pytest.raises(ValueError):
        psi.values[0] = 0


def test_inner_product_grid_mismatch():
    a = WaveFunction(make_grid(-1, 1, 33), np.ones(33))
    b = WaveFunction(make_grid(-1, 2, 33), np.ones(33))
    with pytest.raises(GridMismatch):
        inner_product(a, b)


def test_gaussian_norm():
    g = make_grid(-20.0, 20.0, 2001)
    psi = WaveFunction(g, (2 * np.pi) ** -0.25 * np.exp(-g.x**2 / 4))
    assert norm_squared(psi) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-3, 3), st.floats(0.2, 3))
def test_trapezoid_exact_for_linear(a, b):
    x = np.linspace(0.0, 2.0, 21)
    assert trapezoid(a + b * x, x[1] - x[0]) == pytest.approx(2 * a + 2 * b, rel=1e-12, abs=1e-12)


def test_second_derivative_exact_on_quadratics_including_ends():
    g = make_grid(-2.0, 3.0, 64)
    y = 3 * g.x**2 - g.x + 2
    np.testing.assert_allclose(second_derivative(y, g.dx), 6.0, atol=1e-9)


def test_second_derivative_second_order():
    errs = []
    for n in (201, 401):
        g = make_grid(0.0, np.pi, n)
        errs.append(np.max(np.abs(second_derivative(np.sin(g.x), g.dx) + np.sin(g.x))))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_second_derivative_needs_dx_for_arrays():
    with pytest.raises(ValueError):
        second_derivative(np.zeros(10))


def test_first_derivative_exact_on_quadratics():
    g = make_grid(-1.0, 1.0, 41)
    np.testing.assert_allclose(first_derivative(g.x**2, g.dx), 2 * g.x, atol=1e-12)


def test_window_mask_is_central():
    g = make_grid(-60.0, 40.0, 8192)
    m = g.window_mask(0.6)
    assert g.x[m].min() >= -40.0 and g.x[m].max() <= 20.0
    assert g.x[m].min() < -39.98 and g.x[m].max() > 19.98
