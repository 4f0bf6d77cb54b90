import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from mfkg import PolynomialPotential, lower_bound_constants
from mfkg.potential import LowerBound, gradient_check

coeff_lists = st.lists(
    st.floats(min_value=-5.0, max_value=5.0), min_size=1, max_size=4
).flatmap(
    lambda cs: st.floats(min_value=0.1, max_value=5.0).map(lambda lead: (*cs, lead))
)


def test_known_values(pot):
    # u(r) = -r + r^2
    assert pot.degree == 2
    assert_allclose(pot.radial(2.0), 2.0)
    assert_allclose(pot.radial_slope(2.0), 3.0)
    assert_allclose(pot.force_coefficient(0.5), 0.0)
    assert_allclose(pot.value(1.0 + 1.0j), 2.0)
    z = 0.5 + 0.25j
    assert_allclose(pot.force(z), (2.0 - 4.0 * abs(z) ** 2) * z)


def test_constructor_validation():
    with pytest.raises(ValueError, match="at least two"):
        PolynomialPotential((1.0,))
    with pytest.raises(ValueError, match="leading coefficient"):
        PolynomialPotential((-1.0, -1.0))


def test_force_is_phase_equivariant(pot):
    z = 0.8 - 0.3j
    for theta in (0.5, 2.0):
        assert_allclose(pot.force(z * np.exp(1j * theta)), pot.force(z) * np.exp(1j * theta))


def test_gradient_check_converges(pot):
    z = 0.7 + 0.2j
    coarse = gradient_check(pot, z, step=1e-3)
    fine = gradient_check(pot, z, step=5e-4)
    assert coarse / fine == pytest.approx(4.0, rel=0.05)
    with pytest.raises(ValueError):
        gradient_check(pot, z, step=0.0)


@settings(max_examples=50, deadline=None)
@given(coeff_lists, st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False))
def test_gradient_check_small_everywhere(coeffs, z):
    pot = PolynomialPotential(coeffs)
    scale = 1.0 + max(abs(c) for c in coeffs) * (1.0 + abs(z)) ** (2 * pot.degree)
    assert gradient_check(pot, z, step=1e-5) < 1e-6 * scale


def test_lower_bound_exact(pot):
    # min of r^2 - r is -1/4 at r = 1/2
    assert_allclose(lower_bound_constants(pot).A, -0.25)
    # with B = 0.3 the shifted minimum is at r = 0.35
    assert_allclose(lower_bound_constants(pot, B=0.3).A, 0.35**2 - 0.7 * 0.35)
    with pytest.raises(ValueError):
        lower_bound_constants(pot, B=-1.0)
    with pytest.raises(ValueError):
        LowerBound(A=0.0, B=-0.5)


@settings(max_examples=50, deadline=None)
@given(coeff_lists, st.floats(min_value=0.0, max_value=2.0))
def test_lower_bound_property(coeffs, B):
    """A really is a lower bound of u(r) + B r over a dense sample of r >= 0."""
    pot = PolynomialPotential(coeffs)
    A = lower_bound_constants(pot, B=B).A
    r = np.linspace(0.0, 50.0, 2001)
    sampled = pot.radial(r) + B * r
    assert np.all(sampled >= A - 1e-9 * (1.0 + np.abs(sampled)))


def test_admissible(rho):
    assert LowerBound(A=0.0, B=0.0).admissible(1.0, rho.l2_norm_sq)
    # ||rho||^2 = 4, so the threshold is B < 1/8
    assert LowerBound(A=0.0, B=0.124).admissible(1.0, rho.l2_norm_sq)
    assert not LowerBound(A=0.0, B=0.126).admissible(1.0, rho.l2_norm_sq)
