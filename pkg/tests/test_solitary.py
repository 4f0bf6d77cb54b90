"""Standing-wave construction, the dispersion scalar, manifold distances."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from mfkg import (
    CouplingProfile, FieldState, PolynomialPotential, SeminormSpec,
    amplitude_roots, build_solitary, charge, dispersion_curve, energy_norm,
    find_resonant_zeros, make_grid, manifold_distance, resolvent_coupling,
    resolvent_profile, stationarity_residual, zero_state,
)
from mfkg.solitary import default_omega_grid, endpoint_coupling_report, shell_max


def test_resolvent_coupling_lattice_sum(grid, rho):
    """s(omega) is the plain lattice sum over |rho_hat|^2 / (xi^2 + m^2 - omega^2)."""
    omega, m = 0.4, 1.0
    expected = np.sum(
        np.abs(rho.rho_hat) ** 2 / (grid.k_squared + m**2 - omega**2)
    ) / grid.box_length
    assert_allclose(resolvent_coupling(rho, omega), expected, rtol=1e-13)


def test_dispersion_curve_shape(rho):
    om = np.linspace(-0.9, 0.9, 19)
    curve = dispersion_curve(rho, om)
    assert np.all(curve.values > 0)
    assert_allclose(curve.values, curve.values[::-1], rtol=1e-12)  # even
    # increasing in |omega|: the gap shrinks toward the threshold
    half = curve.values[9:]
    assert np.all(np.diff(half) > 0)


def test_resolvent_coupling_complex_frequency(rho):
    s = resolvent_coupling(rho, 0.5 + 0.2j)
    assert isinstance(s, complex) and s.imag != 0
    with pytest.raises(ValueError, match="upper half-plane"):
        resolvent_coupling(rho, 0.5 - 0.2j)


def test_resolvent_rejects_resonant_frequency(rho):
    # a Gaussian rho_hat never vanishes, so every shell above m is resonant
    with pytest.raises(ValueError, match="resonant shell"):
        resolvent_coupling(rho, 1.5)
    assert shell_max(rho, 1.5) > 0
    with pytest.raises(ValueError):
        shell_max(rho, 0.5)


def test_resolvent_profile_solves_division_problem(grid, rho):
    omega, m = 0.3, 1.0
    phi = resolvent_profile(rho, omega)
    back = grid.inverse((grid.k_squared + m**2 - omega**2) * grid.forward(phi))
    assert_allclose(back.real, rho.values, atol=1e-10)
    assert np.max(np.abs(back.imag)) < 1e-10


def test_amplitude_roots_closed_form(pot):
    # for u = -r + r^2 the condition 1 = s(2 - 4 r s^2) has the single root below
    for s in (0.6, 1.0, 3.0):
        expected = (2.0 * s - 1.0) / (4.0 * s**3)
        assert_allclose(amplitude_roots(pot, s), [expected], rtol=1e-10)
    assert amplitude_roots(pot, 0.4) == []  # needs s > 1/2
    with pytest.raises(ValueError):
        amplitude_roots(pot, 0.0)


def test_build_solitary_invariants(grid, rho, pot):
    wave = build_solitary(rho, pot, omega=0.5, theta=0.7)
    assert stationarity_residual(wave, rho, pot) < 1e-12
    state = wave.initial_state()
    # Q = omega ||phi||^2 on the pi = -i omega phi slice
    assert_allclose(charge(state), 0.5 * grid.l2sq(wave.profile), rtol=1e-12)
    assert_allclose(wave.charge, charge(state))
    # the phase theta rotates the profile but changes no invariant
    other = build_solitary(rho, pot, omega=0.5, theta=0.0)
    assert_allclose(np.abs(wave.profile), np.abs(other.profile), atol=1e-14)
    assert_allclose(wave.energy, other.energy, rtol=1e-12)


def test_build_solitary_rejects_impossible_frequency(grid, pot):
    # weak coupling keeps s below 1/2 everywhere, so no amplitude root exists
    weak = CouplingProfile.gaussian(grid, amplitude=0.3, width=1.0)
    with pytest.raises(ValueError, match="no standing-wave amplitude"):
        build_solitary(weak, pot, omega=0.0)
    with pytest.raises(ValueError, match="root_index"):
        build_solitary(CouplingProfile.gaussian(grid, amplitude=2.0), pot, 0.0, root_index=5)


def test_state_at_rotates_phase(rho, pot):
    wave = build_solitary(rho, pot, omega=0.5)
    t = 1.3
    state = wave.state_at(t)
    assert_allclose(state.psi, wave.profile * np.exp(-0.5j * t), atol=1e-14)
    assert state.time == t


def test_endpoint_report(grid, rho):
    report = endpoint_coupling_report(rho)
    assert report["sum_excluding_zero_mode"] > 0
    assert not report["zero_mode_negligible"]  # Gaussian has full mass at xi = 0
    with pytest.raises(ValueError, match="endpoint"):
        resolvent_coupling(rho, 1.0)


def test_find_resonant_zeros(grid):
    # plant a spectral zero on the shell |xi| = 2 by filtering a wide Gaussian
    xi = grid.wavenumbers[0]
    spectrum = (xi**2 - 4.0) * np.exp(-0.5 * xi**2)
    rho0 = CouplingProfile.from_spectrum(grid, spectrum)
    # tol must separate the zero from the small-but-nonzero Gaussian tail
    zeros = find_resonant_zeros(rho0, omega_max=3.0, tol=0.01 * rho0.max_abs_hat)
    expected = np.sqrt(4.0 + 1.0)
    assert len(zeros.points) == 1
    assert abs(zeros.points[0] - expected) < 2.0 * grid.mode_spacing
    # and the embedded frequency is now admissible for the resolvent
    assert np.isfinite(resolvent_coupling(rho0, zeros.points[0]))
    plain = CouplingProfile.gaussian(grid, amplitude=2.0)
    assert find_resonant_zeros(plain, 3.0, tol=0.01 * plain.max_abs_hat).points == ()


def test_default_omega_grid():
    base = default_omega_grid(m=1.0, count=11)
    assert base.min() == -0.99 and base.max() == 0.99
    with_zeros = default_omega_grid(m=1.0, zeros=(2.2,), count=11)
    assert 2.2 in with_zeros and -2.2 in with_zeros


def test_manifold_distance_vanishes_on_the_manifold(grid, rho, pot):
    spec = SeminormSpec(0.5, 8.0, 8.0)
    wave = build_solitary(rho, pot, omega=0.37, theta=2.1)
    state = wave.state_at(4.2)
    d, best = manifold_distance(state, rho, pot, spec)
    assert d < 1e-7 * energy_norm(state)
    assert best == pytest.approx(0.37, abs=1e-4)
    # the zero field lies on the manifold as well
    d0, best0 = manifold_distance(zero_state(grid), rho, pot, spec)
    assert d0 == 0.0 and best0 is None


def test_manifold_distance_sees_perturbations(grid, rho, pot, rng):
    from mfkg import local_seminorm

    spec = SeminormSpec(0.5, 8.0, 8.0)
    wave = build_solitary(rho, pot, omega=0.37)
    bump = 0.05 * np.exp(-0.5 * grid.radius**2) * (1 + 1j)
    state = FieldState(grid, wave.profile + bump, -1j * 0.37 * wave.profile, 0.0)
    d, _ = manifold_distance(state, rho, pot, spec)
    size = local_seminorm(FieldState(grid, bump, np.zeros_like(bump), 0.0), spec)
    assert 0.1 * size < d <= 1.5 * size


def test_manifold_distance_global_norm_variant(grid, rho, pot):
    wave = build_solitary(rho, pot, omega=-0.2)
    d, best = manifold_distance(wave.initial_state(), rho, pot, None, use_global_norm=True)
    assert d < 1e-7 * energy_norm(wave.initial_state())
    assert best == pytest.approx(-0.2, abs=1e-4)
