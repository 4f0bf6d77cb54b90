"""The U(1)-invariant polynomial self-interaction U and its force F = -grad U.

U depends on the coupling amplitude z only through |z|^2:

    U(z) = sum_{n=1..p} u_n |z|^{2n},      p >= 2,  u_p > 0,

so F(z) = alpha(|z|^2) z with alpha(r) = -2 u'(r), and F commutes with
global phase rotations.  The positive leading coefficient makes U bounded
below and yields the a-priori bound constants computed here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = ["PolynomialPotential", "LowerBound", "gradient_check", "lower_bound_constants"]


@dataclass(frozen=True)
class PolynomialPotential:
    """Coefficients (u_1, ..., u_p) of U(z) = sum u_n |z|^{2n}."""

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) < 2:
            raise ValueError("need at least two coefficients (degree p >= 2)")
        if not coeffs[-1] > 0:
            raise ValueError("leading coefficient must be positive (u_p > 0)")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    # radial pieces: r = |z|^2

    def radial(self, r):
        """u(r) = sum u_n r^n."""
        return P.polyval(r, (0.0, *self.coeffs))

    def radial_slope(self, r):
        """u'(r)."""
        return P.polyval(r, tuple((n + 1) * c for n, c in enumerate(self.coeffs)))

    def force_coefficient(self, r):
        """alpha(r) = -2 u'(r), so that F(z) = alpha(|z|^2) z."""
        return -2.0 * self.radial_slope(r)

    # complex-argument forms

    def value(self, z):
        """U(z), real."""
        return self.radial(np.abs(z) ** 2)

    def force(self, z):
        """F(z) = -dU/d(conj Re, Im) = alpha(|z|^2) z."""
        z = np.asarray(z) if isinstance(z, np.ndarray) else z
        return self.force_coefficient(np.abs(z) ** 2) * z


def gradient_check(pot: PolynomialPotential, z: complex, step: float = 1e-5) -> float:
    """Max deviation between F and the central-difference gradient of -U.

    Second-order accurate in ``step``; halving the step should quarter the
    returned deviation until roundoff takes over.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    du_re = (pot.value(z + step) - pot.value(z - step)) / (2.0 * step)
    du_im = (pot.value(z + 1j * step) - pot.value(z - 1j * step)) / (2.0 * step)
    f = complex(pot.force(z))
    return max(abs(-du_re - f.real), abs(-du_im - f.imag))


@dataclass(frozen=True)
class LowerBound:
    """Constants with U(z) >= A - B |z|^2 for all z."""

    A: float
    B: float

    def __post_init__(self) -> None:
        if self.B < 0:
            raise ValueError("B must be nonnegative")

    def admissible(self, m: float, rho_l2_sq: float) -> bool:
        """Whether B is small enough for the a-priori energy bound, B < m^2 / (2 ||rho||^2)."""
        return self.B < m * m / (2.0 * rho_l2_sq)


def lower_bound_constants(pot: PolynomialPotential, B: float = 0.0) -> LowerBound:
    """Best A for a given B >= 0: A = min_{r >= 0} u(r) + B r.

    The minimum is found exactly from the real critical points of the shifted
    polynomial (companion-matrix roots), plus the boundary r = 0.
    """
    if B < 0:
        raise ValueError("B must be nonnegative")
    # d/dr [u(r) + B r] has ascending coefficients (u_1 + B, 2 u_2, ..., p u_p)
    slope = [pot.coeffs[0] + B] + [(n + 2) * c for n, c in enumerate(pot.coeffs[1:])]
    roots = np.polynomial.Polynomial(slope).roots()
    candidates = [0.0]
    for root in roots:
        if abs(root.imag) < 1e-9 * (1.0 + abs(root)) and root.real > 0:
            candidates.append(float(root.real))
    values = [float(pot.radial(r) + B * r) for r in candidates]
    return LowerBound(A=min(values), B=B)
