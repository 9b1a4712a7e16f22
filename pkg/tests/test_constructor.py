import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonspreading.constructor import (
    ShapeSolution,
    airy_reference,
    assemble_packet,
    build_phase,
    consistency_check,
    count_nodes,
    effective_potential,
    force_double_integrals,
    gaussian_packet,
    motion_from_constraint,
    sho_reference,
    solve_shape,
    time_lattice,
    uniform_force_track,
)
from nonspreading.core import UnitSystem, make_grid, norm_squared
from nonspreading.errors import (
    ComplexPotential,
    ConvergenceFailure,
    NotConfining,
    SupportEscape,
    TimeOutOfRange,
    UnsupportedPotential,
)
from nonspreading.specfun import sho_eigenfunction
from nonspreading.specs import (
    ComplexAbsorber,
    ConstantAccel,
    ConstantForce,
    FreeSpace,
    Harmonic,
    MovingQuarticDriven,
    NumericMotion,
    PolynomialMotion,
    PowerLaw,
    Rest,
    SinusoidForce,
    SinusoidMotion,
    TabulatedForce,
    UniformForce,
    motion_eval,
)
from nonspreading.tridiag import dense_compact_hamiltonian, kinetic_scale

GRID = make_grid(-12.0, 12.0, 4096)
TIMES = np.linspace(0.0, 2.0, 17)


# ---------------------------------------------------------------- effective potential


def test_veff_free_space_is_linear():
    ve = effective_potential(FreeSpace(), ConstantAccel(1.0), GRID, 0.7)
    np.testing.assert_allclose(ve.samples, 0.5 * GRID.x, atol=1e-14)
    assert ve.is_linear()


def test_veff_harmonic_sinusoid():
    ve = effective_potential(Harmonic(1.0), SinusoidMotion(1.0, 1.0), GRID, 1.1)
    np.testing.assert_allclose(ve.samples, 0.5 * GRID.x**2, atol=1e-12)
    assert ve.is_confining() and not ve.is_linear()


def test_veff_rest_is_shifted_potential():
    ve = effective_potential(PowerLaw(1.0, 3), Rest(), GRID, 0.0)
    np.testing.assert_allclose(ve.samples, GRID.x**3, atol=1e-10)
    assert abs(ve.poly_coeffs[0]) < 1e-9 and ve.poly_coeffs[3] == pytest.approx(1.0)


def test_veff_rejects_complex():
    with pytest.raises(ComplexPotential):
        effective_potential(ComplexAbsorber(FreeSpace(), 0.1), Rest(), GRID, 0.0)
    with pytest.raises(ComplexPotential):
        consistency_check(ComplexAbsorber(FreeSpace(), 0.1), Rest(), GRID, TIMES)


@given(st.floats(0.0, 5.0))
def test_veff_vanishes_at_origin(t):
    g = make_grid(-5.0, 5.0, 101)
    for pot, mot in (
        (Harmonic(1.0, 0.3), SinusoidMotion(1.0, 1.0)),
        (PowerLaw(1.0, 4), PolynomialMotion((0, 1))),
        (UniformForce(SinusoidForce(0.3, 2.0)), ConstantAccel(1.0)),
    ):
        ve = effective_potential(pot, mot, g, t)
        assert ve.samples[50] == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------- consistency


@pytest.mark.parametrize(
    "pot, mot",
    [
        (FreeSpace(), ConstantAccel(1.0)),
        (UniformForce(ConstantForce(2.0)), PolynomialMotion((0, 0, 1.25))),
        (Harmonic(1.0), SinusoidMotion(1.0, 1.0)),
        (MovingQuarticDriven(1.0, PolynomialMotion((0, 0, 0.2))), PolynomialMotion((0, 0, 0.2))),
        (PowerLaw(1.0, 4), Rest()),
    ],
)
def test_consistent_pairs(pot, mot):
    g = make_grid(-5.0, 5.0, 1024)
    rep = consistency_check(pot, mot, g, TIMES)
    assert rep.consistent and rep.verdict == "consistent" and rep.offending_powers == ()


def test_uniform_force_constraint_motion_is_consistent():
    times = time_lattice(2.0, 1e-3)
    pot = UniformForce(SinusoidForce(0.3, 2.0))
    mot = motion_from_constraint(pot, {"B": 1.0}, times=times)
    rep = consistency_check(pot, mot, make_grid(-5.0, 5.0, 512), times[::125])
    assert rep.consistent


def test_no_go_frequency_ramp():
    rep = consistency_check(Harmonic(1.0, 0.1), SinusoidMotion(1.0, 1.0), GRID, TIMES)
    assert not rep.consistent and 2 in rep.offending_powers
    assert rep.max_time_variation[2] > 1e-3


def test_no_go_moving_quartic():
    rep = consistency_check(PowerLaw(1.0, 4), PolynomialMotion((0, 1)), make_grid(-5, 5, 512), TIMES)
    assert 3 in rep.offending_powers
    # coefficient of q^3 is 4 lambda d(t)
    assert rep.max_time_variation[3] == pytest.approx(4 * 2.0, rel=1e-6)


def test_consistency_needs_eight_times():
    with pytest.raises(ValueError):
        consistency_check(FreeSpace(), Rest(), GRID, np.linspace(0, 1, 7))


def test_sample_check_catches_non_polynomial_change():
    # a time-dependent Gaussian well is not a polynomial; the sample test must flag it
    from nonspreading.constructor import effective as eff

    def fake_samples(pot, motion, q, t, units):
        return -np.exp(-(q**2) * (1 + 0.1 * t))

    orig = eff._veff_samples
    eff._veff_samples = fake_samples
    try:
        rep = consistency_check(FreeSpace(), Rest(), make_grid(-10, 10, 256), TIMES, max_degree=2)
    finally:
        eff._veff_samples = orig
    assert not rep.consistent and rep.sample_variation > 1e-3


# ---------------------------------------------------------------- shape


def test_sho_shapes():
    ve = effective_potential(Harmonic(1.0), Rest(), GRID, 0.0)
    shapes = solve_shape(ve, 6)
    for n, s in enumerate(shapes):
        assert s.E_eff == pytest.approx(n + 0.5, abs=1e-6)
        assert s.node_count == n
        assert np.sum(s.f**2) * GRID.dx == pytest.approx(1.0, abs=1e-10)
        mag = np.abs(s.f)
        # ties between mirror-image extrema go to the right
        assert s.f[np.nonzero(mag >= (1 - 1e-6) * mag.max())[0][-1]] > 0
        # matches the analytic eigenfunction up to the sign convention
        ref = sho_eigenfunction(n, GRID.x)
        sign = np.sign(np.dot(ref, s.f))
        assert np.max(np.abs(sign * s.f - ref)) < 1e-6


def test_shape_eigen_residual():
    ve = effective_potential(Harmonic(1.0), Rest(), GRID, 0.0)
    for s in solve_shape(ve, 3):
        f, h = s.f, GRID.dx
        f2 = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h**2)
        r = -0.5 * f2 + (ve.samples[2:-2] - s.E_eff) * f[2:-2]
        assert np.linalg.norm(r) / np.linalg.norm(f) < 1e-6


@pytest.mark.parametrize("pot, x_lim", [(Harmonic(1.0), 6.0), (PowerLaw(1.0, 4), 5.0)])
def test_shape_against_dense_oracle_256(pot, x_lim):
    g = make_grid(-x_lim, x_lim, 256)
    ve = effective_potential(pot, Rest(), g, 0.0)
    found = np.array([s.E_eff for s in solve_shape(ve, 8)])
    dense = np.linalg.eigvalsh(dense_compact_hamiltonian(ve.samples[1:-1], kinetic_scale(g.dx, 1.0, 1.0)))[:8]
    np.testing.assert_allclose(found, dense, rtol=1e-10)


def test_quartic_ground_state():
    g = make_grid(-8.0, 8.0, 4096)
    ve = effective_potential(PowerLaw(1.0, 4), Rest(), g, 0.0)
    # H = p^2 + q^4 (mass 1/2) gives the textbook 1.0603620905
    assert solve_shape(ve, 1, UnitSystem(1.0, 0.5))[0].E_eff == pytest.approx(1.0603620904, abs=1e-6)
    assert solve_shape(ve, 1)[0].E_eff == pytest.approx(0.6679862591, abs=1e-6)


def test_airy_branch():
    ve = effective_potential(FreeSpace(), ConstantAccel(1.0), make_grid(-60, 40, 1024), 0.0)
    (s,) = solve_shape(ve, 3)
    assert not s.normalizable and s.E_eff == 0.0 and s.airy_scale == pytest.approx(1.0)
    assert s.evaluate(0.0) == pytest.approx(0.3550280539, abs=1e-10)
    with pytest.raises(ValueError):
        s.mean_position()


def test_not_confining():
    ve = effective_potential(PowerLaw(1.0, 3), Rest(), GRID, 0.0)
    with pytest.raises(NotConfining):
        solve_shape(ve)
    ve = effective_potential(Harmonic(0.05), Rest(), make_grid(-3, 3, 256), 0.0)
    with pytest.raises(NotConfining):
        solve_shape(ve, 5)


def test_too_coarse_grid_fails_cleanly():
    ve = effective_potential(PowerLaw(1.0, 4), Rest(), make_grid(-20, 20, 64), 0.0)
    with pytest.raises(ConvergenceFailure):
        solve_shape(ve)


def test_count_nodes():
    x = np.linspace(-5, 5, 1001)
    assert count_nodes(np.exp(-(x**2))) == 0
    assert count_nodes(sho_eigenfunction(3, x)) == 3


def test_from_samples_normalizes():
    g = make_grid(-10, 10, 512)
    s = ShapeSolution.from_samples(g, -3 * np.exp(-(g.x**2)))
    assert s.f.max() > 0 and np.sum(s.f**2) * g.dx == pytest.approx(1.0)


# ---------------------------------------------------------------- motion and phase


def test_motion_from_constraint_examples():
    d, _, _ = motion_eval(motion_from_constraint(FreeSpace(), {"B": 1.0}), 2.0)
    assert d == pytest.approx(1.0)
    d, _, _ = motion_eval(motion_from_constraint(UniformForce(ConstantForce(2.0))), 1.0)
    assert d == pytest.approx(1.0)
    d, _, _ = motion_from_constraint(Harmonic(1.0), v0=1.0), None, None
    assert motion_eval(d, math.pi / 2)[0] == pytest.approx(1.0)


def test_motion_from_constraint_rk4_paths():
    times = time_lattice(2.0, 1e-3)
    mot = motion_from_constraint(UniformForce(SinusoidForce(1.0, 1.0)), times=times)
    assert isinstance(mot, NumericMotion)
    # d'' = sin t, d(0) = d'(0) = 0 -> d = t - sin t
    assert motion_eval(mot, 2.0)[0] == pytest.approx(2.0 - math.sin(2.0), abs=1e-10)
    mot = motion_from_constraint(Harmonic(2.0), {"offset": 4.0}, times=times)
    # d'' + 4 d = 4 -> d = 1 - cos 2t
    assert motion_eval(mot, 1.3)[0] == pytest.approx(1 - math.cos(2.6), abs=1e-9)


def test_motion_from_constraint_errors():
    with pytest.raises(UnsupportedPotential):
        motion_from_constraint(PowerLaw(1.0, 4))
    with pytest.raises(UnsupportedPotential):
        motion_from_constraint(Harmonic(1.0, 0.1))
    with pytest.raises(ValueError):
        motion_from_constraint(FreeSpace(), d0=1.0)


def test_phase_free_space():
    times = time_lattice(1.0, 1e-3)
    ph = build_phase(FreeSpace(), ConstantAccel(1.0), 0.0, times)
    assert ph.phi1[-1] == pytest.approx(0.5)
    assert ph.phi0[-1] == pytest.approx(-1 / 12, abs=1e-12)
    assert ph.phi0[0] == 0.0 and ph.d[0] == 0.0


def test_phase_harmonic():
    times = np.linspace(0.0, math.pi / 2, 1001)
    ph = build_phase(Harmonic(1.0), SinusoidMotion(1.0, 1.0), 0.5, times)
    assert ph.phi1[-1] == pytest.approx(0.0, abs=1e-12)
    assert ph.phi0[-1] == pytest.approx(-math.pi / 4, abs=1e-10)
    with pytest.raises(TimeOutOfRange):
        ph.phi0_at(2.0)


@given(st.floats(0.1, 3.0), st.floats(0.2, 2.0))
def test_phi1_is_exactly_m_ddot_over_hbar(hbar, mass):
    u = UnitSystem(hbar, mass)
    ph = build_phase(Harmonic(1.0), SinusoidMotion(0.7, 1.0), 0.5, np.linspace(0, 1, 33), u)
    assert np.array_equal(ph.phi1, mass * ph.d_dot / hbar)


def test_phase_rejects_complex():
    with pytest.raises(ComplexPotential):
        build_phase(ComplexAbsorber(Harmonic(1.0), 0.1), Rest(), 0.5, TIMES)


def test_double_integral_identity():
    times = np.linspace(0.0, math.pi, 2001)
    nested, identity = force_double_integrals(SinusoidForce(1.0, 1.0), times)
    assert nested[-1] == pytest.approx(math.pi, abs=1e-10)
    assert np.max(np.abs(nested - identity)) < 1e-8


def test_uniform_force_track():
    times = time_lattice(1.0, 1e-3)
    tr = uniform_force_track(ConstantForce(2.0), 0.0, times)
    assert tr.d[-1] == pytest.approx(1.0) and tr.phi1[-1] == pytest.approx(2.0)
    free = uniform_force_track(ConstantForce(0.0), 1.0, times)
    assert free.phi0[-1] == pytest.approx(-1 / 12, abs=1e-12)
    # quadrature form agrees with the generic phase integral
    pot = UniformForce(SinusoidForce(0.3, 2.0))
    times = time_lattice(2.0, 1e-3)
    mot = motion_from_constraint(pot, {"B": 1.0}, times=times)
    gen = build_phase(pot, mot, 0.0, times)
    tr = uniform_force_track(pot.force, 1.0, times)
    assert np.max(np.abs(gen.phi0 - tr.phi0)) < 1e-9
    assert np.max(np.abs(gen.d - tr.d)) < 1e-9


def test_uniform_force_track_tabulated_range():
    t = np.linspace(0.0, 1.0, 101)
    with pytest.raises(TimeOutOfRange):
        uniform_force_track(TabulatedForce(t, np.sin(t)), 0.0, np.linspace(0.0, 2.0, 201))


def test_time_lattice():
    assert time_lattice(1.0, 0.25).tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ValueError):
        time_lattice(1.0, 0.3)


# ---------------------------------------------------------------- packets and references


def _sho_packet(n, t, x0=1.0):
    ve = effective_potential(Harmonic(1.0), Rest(), GRID, 0.0)
    shape = solve_shape(ve, n + 1)[n]
    mot = motion_from_constraint(Harmonic(1.0), v0=x0)
    ph = build_phase(Harmonic(1.0), mot, shape.E_eff, np.linspace(0.0, 2 * math.pi, 4001))
    return shape, mot, ph, assemble_packet(shape, mot, ph, GRID, t)


def test_assembled_density_is_rigid_translate():
    shape, mot, ph, psi = _sho_packet(0, math.pi)
    i = np.argmax(psi.density)
    assert GRID.x[i] == pytest.approx(0.0, abs=GRID.dx)
    assert psi.density.max() == pytest.approx(math.pi**-0.5, rel=2e-5)


def test_assembled_packet_matches_sho_reference():
    for n in (0, 2):
        _, _, _, psi = _sho_packet(n, 1.3)
        ref = sho_reference(n, 1.0, 1.0, GRID, 1.3)
        sign = np.sign(np.real(np.vdot(ref.values, psi.values)))
        assert np.max(np.abs(sign * psi.values - ref.values)) < 1e-6


def test_assembled_phase_is_linear_at_t0():
    shape, mot, ph, psi = _sho_packet(2, 0.0)
    big = np.abs(shape.f) > 1e-6 * np.abs(shape.f).max()
    # arg(psi^2)/2 removes the sign of f; compare with phi1(0) x
    phase = 0.5 * np.unwrap(np.angle(psi.values[big] ** 2))
    x = GRID.x[big]
    resid = phase - np.polyval(np.polyfit(x, phase, 1), x)
    assert np.max(np.abs(resid)) < 1e-10
    assert np.polyfit(x, phase, 1)[0] == pytest.approx(1.0, abs=1e-10)


def test_assemble_support_escape():
    shape, mot, ph, _ = _sho_packet(0, 0.0, x0=1.0)
    small = make_grid(-3.0, 3.0, 512)
    with pytest.raises(SupportEscape):
        assemble_packet(shape, mot, ph, small, math.pi / 2)


def test_airy_packet_matches_reference():
    g = make_grid(-60.0, 40.0, 8192)
    pot, mot = FreeSpace(), ConstantAccel(1.0)
    shape = solve_shape(effective_potential(pot, mot, g, 0.0))[0]
    ph = build_phase(pot, mot, 0.0, time_lattice(1.0, 1e-3))
    psi = assemble_packet(shape, mot, ph, g, 1.0)
    m = g.window_mask(0.6)
    assert np.max(np.abs(psi.values[m] - airy_reference(1.0, g, 1.0).values[m])) < 1e-8


def test_airy_reference_values():
    g = make_grid(-10.0, 10.0, 2001)
    ref = airy_reference(1.0, g, 0.0)
    assert np.all(ref.values.imag == 0.0)
    assert ref.values[1000].real == pytest.approx(0.3550281, abs=1e-7)
    # peak argument moves with d = t^2/4
    g2 = make_grid(-9.0, 11.0, 2001)
    r2 = airy_reference(1.0, g2, 2.0)
    assert abs(r2.values[1000]) == pytest.approx(0.3550280539, abs=1e-10)


def test_sho_reference_cases():
    ref = sho_reference(0, 0.0, 1.0, GRID, 2.0)
    np.testing.assert_allclose(ref.values, sho_eigenfunction(0, GRID.x) * np.exp(-1j), atol=1e-14)
    ref = sho_reference(2, 1.0, 1.0, GRID, 0.0)
    np.testing.assert_allclose(ref.values, sho_eigenfunction(2, GRID.x) * np.exp(1j * GRID.x), atol=1e-14)
    ref = sho_reference(0, 1.0, 1.0, GRID, math.pi / 2)
    assert GRID.x[np.argmax(ref.density)] == pytest.approx(1.0, abs=GRID.dx)


def test_gaussian_packet_norm():
    g = make_grid(-40, 40, 4096)
    assert norm_squared(gaussian_packet(g, 1.0)) == pytest.approx(1.0, abs=1e-12)
