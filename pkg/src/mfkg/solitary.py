"""The solitary-wave manifold: profiles, amplitude condition, distances.

A standing wave psi(t) = phi e^{-i omega t} solves the field equation iff
the profile is proportional to the resolvent applied to the coupling,

    phi_hat(xi) = c rho_hat(xi) / (|xi|^2 + m^2 - omega^2),

and the complex amplitude c satisfies the scalar condition

    s(omega) * alpha(|c|^2 s(omega)^2) = 1,
    s(omega)  = (2 pi)^{-n} int |rho_hat|^2 / (|xi|^2 + m^2 - omega^2) d xi,

evaluated here as a lattice sum.  Profiles exist for |omega| < m, and also
at embedded frequencies |omega| > m where rho_hat vanishes on the resonant
shell |xi| = sqrt(omega^2 - m^2) so the singularity is removable.  The zero
field is always on the manifold.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .fields import (
    CouplingProfile,
    FieldState,
    SeminormSpec,
    charge,
    energy,
    inner_product,
    require_same_grid,
    seminorm_inner_product,
    _windowed_weighted_hats,
)
from .grid import Grid
from .potential import PolynomialPotential

__all__ = [
    "DispersionCurve",
    "ResonantZeros",
    "SolitaryWave",
    "resolvent_coupling",
    "resolvent_profile",
    "dispersion_curve",
    "endpoint_coupling_report",
    "find_resonant_zeros",
    "amplitude_roots",
    "build_solitary",
    "stationarity_residual",
    "default_omega_grid",
    "manifold_distance",
]

# Relative size below which rho_hat on a resonant shell counts as vanishing.
SHELL_TOL = 0.05
_DEN_FLOOR_FRAC = 1e-13


def _shell_band(grid: Grid, k_shell: float) -> np.ndarray:
    """Lattice points within one mode spacing of the sphere |xi| = k_shell."""
    return np.abs(np.sqrt(grid.k_squared) - k_shell) <= grid.mode_spacing


def shell_max(rho: CouplingProfile, omega: float, m: float = 1.0) -> float:
    """max |rho_hat| over the discrete resonant shell of a real omega, |omega| > m."""
    k_sq = omega * omega - m * m
    if k_sq <= 0:
        raise ValueError("resonant shells exist only for |omega| > m")
    k_shell = float(np.sqrt(k_sq))
    grid = rho.grid
    if k_shell > grid.nyquist:
        raise ValueError(
            f"resonant shell |xi|={k_shell:g} lies beyond the grid bandwidth {grid.nyquist:g}"
        )
    band = _shell_band(grid, k_shell)
    if not band.any():
        return 0.0
    return float(np.max(np.abs(rho.rho_hat[band])))


def _protected_resolvent_terms(rho: CouplingProfile, den: np.ndarray, num: np.ndarray, m: float):
    """num / den with exact-zero denominators dropped where rho_hat also vanishes."""
    floor = _DEN_FLOOR_FRAC * m * m
    risky = np.abs(den) <= floor
    if risky.any():
        bad = risky & (np.abs(rho.rho_hat) > SHELL_TOL * rho.max_abs_hat)
        if bad.any():
            raise ValueError("resolvent denominator vanishes where rho_hat does not")
        return np.where(risky, 0.0, num / np.where(risky, 1.0, den))
    return num / den


def _check_real_frequency(rho: CouplingProfile, omega: float, m: float, shell_tol: float) -> None:
    if abs(omega) < m:
        return
    if abs(omega) == m:
        # The xi = 0 mode is excluded separately; require it to be negligible.
        zero_amp = float(np.abs(rho.rho_hat[(0,) * rho.grid.dim]))
        if zero_amp > shell_tol * rho.max_abs_hat:
            raise ValueError(
                "endpoint |omega| = m not admissible on this grid: the xi=0 mode of "
                f"rho_hat is {zero_amp:.3g}, not negligible (see endpoint_coupling_report)"
            )
        return
    peak = shell_max(rho, omega, m)
    if peak > shell_tol * rho.max_abs_hat:
        raise ValueError(
            f"omega={omega:g} is not an admissible embedded frequency: |rho_hat| reaches "
            f"{peak:.3g} on the resonant shell (tolerance {shell_tol:g} relative)"
        )


def resolvent_coupling(rho: CouplingProfile, omega, m: float = 1.0, shell_tol: float = SHELL_TOL):
    """The scalar s(omega) = <rho, resolvent rho> as a lattice sum.

    Real for real admissible omega (|omega| < m, the endpoints, or embedded
    frequencies where rho_hat vanishes on the resonant shell); complex omega
    in the upper half-plane are evaluated directly.
    """
    grid = rho.grid
    num = np.abs(rho.rho_hat) ** 2
    if isinstance(omega, complex) and omega.imag != 0.0:
        if omega.imag < 0:
            raise ValueError("complex frequencies must lie in the upper half-plane")
        den = grid.k_squared + m * m - omega * omega
        return complex(np.sum(num / den) / grid.box_length**grid.dim)
    omega = float(np.real(omega))
    _check_real_frequency(rho, omega, m, shell_tol)
    den = grid.k_squared + m * m - omega * omega
    terms = _protected_resolvent_terms(rho, den, num, m)
    return float(np.sum(terms) / grid.box_length**grid.dim)


def resolvent_profile(
    rho: CouplingProfile, omega: float, m: float = 1.0, shell_tol: float = SHELL_TOL
) -> np.ndarray:
    """Profile of the unit-amplitude standing wave, (m^2 - Lap - omega^2)^{-1} rho."""
    grid = rho.grid
    omega = float(np.real(omega))
    _check_real_frequency(rho, omega, m, shell_tol)
    den = grid.k_squared + m * m - omega * omega
    spectrum = _protected_resolvent_terms(rho, den, rho.rho_hat, m)
    return grid.inverse(spectrum)


@dataclass(eq=False)
class DispersionCurve:
    """s(omega) sampled on a frequency grid."""

    omegas: np.ndarray
    values: np.ndarray


def dispersion_curve(rho: CouplingProfile, omegas, m: float = 1.0) -> DispersionCurve:
    om = np.asarray(omegas, dtype=float)
    vals = np.array([resolvent_coupling(rho, w, m) for w in om])
    return DispersionCurve(om, vals)


def endpoint_coupling_report(rho: CouplingProfile, m: float = 1.0) -> dict:
    """Diagnostics for the threshold frequencies |omega| = m.

    Returns the lattice sum of |rho_hat|^2 / |xi|^4 with the xi = 0 mode
    excluded, together with that mode's magnitude.  The sum is a
    resolution-dependent surrogate for the continuum integrability condition
    at the endpoint; a large excluded mode means the verdict is meaningless
    at this resolution.
    """
    grid = rho.grid
    num = np.abs(rho.rho_hat) ** 2
    k2 = grid.k_squared
    mask = k2 > 0
    total = float(np.sum(num[mask] / k2[mask] ** 2) / grid.box_length**grid.dim)
    zero_mode = float(np.abs(rho.rho_hat[(0,) * grid.dim]))
    return {
        "sum_excluding_zero_mode": total,
        "zero_mode_abs": zero_mode,
        "zero_mode_negligible": bool(zero_mode <= SHELL_TOL * rho.max_abs_hat),
    }


@dataclass(frozen=True)
class ResonantZeros:
    """Embedded frequencies omega > m where rho_hat vanishes on the shell."""

    points: tuple[float, ...]
    tol: float

    def __iter__(self):
        return iter(self.points)


def find_resonant_zeros(
    rho: CouplingProfile, omega_max: float, tol: float, m: float = 1.0
) -> ResonantZeros:
    """Scan (m, omega_max] for shells on which |rho_hat| stays below ``tol``.

    The shell radius is swept in half-mode-spacing increments; contiguous
    sub-threshold runs collapse to the frequency minimizing the band maximum.
    Wide runs (several mode spacings) are reported with a warning since they
    indicate a non-isolated zero set at this resolution.
    """
    if omega_max <= m:
        raise ValueError("omega_max must exceed m")
    grid = rho.grid
    k_max = float(np.sqrt(omega_max**2 - m * m))
    if k_max > grid.nyquist:
        raise ValueError("omega_max probes shells beyond the grid bandwidth")
    dxi = grid.mode_spacing
    k_grid = np.arange(0.5 * dxi, k_max + 0.25 * dxi, 0.5 * dxi)
    abs_k = np.sqrt(grid.k_squared).ravel()
    abs_hat = np.abs(rho.rho_hat).ravel()
    order = np.argsort(abs_k)
    abs_k, abs_hat = abs_k[order], abs_hat[order]

    peaks = np.empty_like(k_grid)
    for i, k in enumerate(k_grid):
        lo = np.searchsorted(abs_k, k - dxi, side="left")
        hi = np.searchsorted(abs_k, k + dxi, side="right")
        peaks[i] = abs_hat[lo:hi].max() if hi > lo else np.inf

    below = peaks < tol
    points: list[float] = []
    i = 0
    while i < len(k_grid):
        if below[i]:
            j = i
            while j + 1 < len(k_grid) and below[j + 1]:
                j += 1
            run = slice(i, j + 1)
            k_best = k_grid[run][np.argmin(peaks[run])]
            points.append(float(np.sqrt(k_best**2 + m * m)))
            if k_grid[j] - k_grid[i] > 4.0 * dxi:
                warnings.warn(
                    f"resonant zero near omega={points[-1]:.4g} is not isolated at this "
                    "resolution (sub-threshold band wider than four mode spacings)",
                    stacklevel=2,
                )
            i = j + 1
        else:
            i += 1
    return ResonantZeros(tuple(points), tol)


def amplitude_roots(pot: PolynomialPotential, s: float) -> list[float]:
    """All r = |c|^2 >= 0 with s * alpha(r s^2) = 1 (companion-matrix roots).

    An empty list means no standing wave with this coupling value exists.
    """
    if s == 0:
        raise ValueError("the amplitude condition is degenerate at s = 0")
    # polynomial in r: sum_n (-2 n u_n s^{2n-1}) r^{n-1} - 1 = 0
    coeffs = [-2.0 * (n + 1) * u * s ** (2 * n + 1) for n, u in enumerate(pot.coeffs)]
    coeffs[0] -= 1.0
    roots = np.polynomial.Polynomial(coeffs).roots()
    out = []
    for z in roots:
        if abs(z.imag) > 1e-9 * (1.0 + abs(z)):
            continue
        r = float(z.real)
        if r < 0 and r > -1e-12:
            r = 0.0
        if r < 0:
            continue
        # guard against spurious roots from near-degenerate leading coefficients
        if abs(s * pot.force_coefficient(r * s * s) - 1.0) < 1e-8:
            out.append(r)
    out.sort()
    return out


@dataclass(eq=False)
class SolitaryWave:
    """A standing wave phi e^{-i omega t} together with its invariants."""

    grid: Grid
    omega: float
    amplitude: complex  # c = <rho, phi> / s(omega)
    profile: np.ndarray
    energy: float
    charge: float

    def initial_state(self, time: float = 0.0) -> FieldState:
        return FieldState(self.grid, self.profile, -1j * self.omega * self.profile, time)

    def state_at(self, t: float) -> FieldState:
        phase = np.exp(-1j * self.omega * t)
        return FieldState(
            self.grid, phase * self.profile, -1j * self.omega * phase * self.profile, t
        )


def build_solitary(
    rho: CouplingProfile,
    pot: PolynomialPotential,
    omega: float,
    theta: float = 0.0,
    m: float = 1.0,
    root_index: int = 0,
) -> SolitaryWave:
    """Construct the standing wave at ``omega`` for the root_index-th amplitude root.

    Roots are sorted ascending in |c|^2.  Raises if no root exists at this
    frequency, or if ``omega`` is outside the admissible set.
    """
    s = resolvent_coupling(rho, omega, m)
    roots = amplitude_roots(pot, s)
    if not roots:
        raise ValueError(f"no standing-wave amplitude exists at omega={omega:g} (s={s:g})")
    if not 0 <= root_index < len(roots):
        raise ValueError(f"root_index {root_index} out of range (found {len(roots)} roots)")
    c = np.sqrt(roots[root_index]) * np.exp(1j * theta)
    profile = c * resolvent_profile(rho, omega, m)
    state = FieldState(rho.grid, profile, -1j * omega * profile, 0.0)
    return SolitaryWave(
        grid=rho.grid,
        omega=float(omega),
        amplitude=complex(c),
        profile=profile,
        energy=energy(state, rho, pot, m),
        charge=charge(state),
    )


def stationarity_residual(
    wave: SolitaryWave, rho: CouplingProfile, pot: PolynomialPotential, m: float = 1.0
) -> float:
    """Relative L2 residual of the profile equation.

    Zero (to roundoff) for waves built by :func:`build_solitary`; useful as an
    independent check because it applies the operator rather than inverting it.
    """
    grid = wave.grid
    phi_hat = grid.forward(wave.profile)
    lin = grid.inverse(-(grid.k_squared + m * m - wave.omega**2) * phi_hat)
    g = complex(grid.dot(rho.values, wave.profile))
    res = lin + pot.force(g) * rho.values
    norm = np.sqrt(grid.l2sq(wave.profile))
    if norm == 0:
        return float(np.sqrt(grid.l2sq(res)))
    return float(np.sqrt(grid.l2sq(res)) / norm)


def default_omega_grid(
    m: float = 1.0,
    zeros: ResonantZeros | tuple[float, ...] = (),
    count: int = 201,
    margin_frac: float = 0.01,
) -> np.ndarray:
    """Frequency candidates for distance scans: (-m, m) interior plus embedded zeros."""
    margin = margin_frac * m
    base = np.linspace(-m + margin, m - margin, count)
    extra = [w for w in zeros]
    extra += [-w for w in zeros]
    if extra:
        return np.concatenate([base, np.asarray(sorted(extra), dtype=float)])
    return base


def manifold_distance(
    state: FieldState,
    rho: CouplingProfile,
    pot: PolynomialPotential,
    spec: SeminormSpec | None,
    omega_grid=None,
    m: float = 1.0,
    use_global_norm: bool = False,
) -> tuple[float, float | None]:
    """Distance from ``state`` to the solitary manifold.

    For each candidate frequency and amplitude root the phase minimization
    min_theta ||Psi - e^{i theta} S||^2 = ||Psi||^2 + ||S||^2 - 2 |<S, Psi>|
    is exact; the frequency is scanned on a grid, then polished by a bounded
    one-dimensional search around the best grid point so the result is not
    limited by the grid pitch.  The zero wave always competes.  Measured in
    the windowed seminorm of ``spec`` (the topology of the attraction
    statement), or the global energy norm with use_global_norm.

    Returns (distance, best_omega); best_omega is None when the zero wave is
    the closest point.
    """
    require_same_grid(rho, state)
    grid = state.grid
    norm_spec = None if use_global_norm else spec
    if omega_grid is None:
        omega_grid = default_omega_grid(m)
    omega_grid = np.asarray(omega_grid, dtype=float)
    psi_w, pi_w = _windowed_weighted_hats(state, norm_spec, m)
    box_vol = grid.box_length**grid.dim
    state_sq = float((np.vdot(psi_w, psi_w) + np.vdot(pi_w, pi_w)).real) / box_vol

    def dist_sq_at(omega: float) -> float:
        try:
            s = resolvent_coupling(rho, omega, m)
        except ValueError:
            return np.inf
        roots = amplitude_roots(pot, s)
        if not roots:
            return np.inf
        base = resolvent_profile(rho, omega, m)
        pair = FieldState(grid, base, -1j * omega * base, 0.0)
        b_psi, b_pi = _windowed_weighted_hats(pair, norm_spec, m)
        base_sq = float((np.vdot(b_psi, b_psi) + np.vdot(b_pi, b_pi)).real) / box_vol
        overlap = abs((np.vdot(b_psi, psi_w) + np.vdot(b_pi, pi_w)) / box_vol)
        return min(state_sq + r * base_sq - 2.0 * np.sqrt(r) * overlap for r in roots)

    best_sq = state_sq  # the zero wave
    best_omega: float | None = None
    for omega in omega_grid:
        d_sq = dist_sq_at(float(omega))
        if d_sq < best_sq:
            best_sq = d_sq
            best_omega = float(omega)

    if best_omega is not None and abs(best_omega) < m:
        # polish inside the spectral gap; embedded candidates stay on-grid
        interior = omega_grid[np.abs(omega_grid) < m]
        pitch = float(np.max(np.diff(np.sort(interior)))) if interior.size > 1 else 0.1 * m
        lo = max(best_omega - pitch, -m + 1e-9 * m)
        hi = min(best_omega + pitch, m - 1e-9 * m)
        res = minimize_scalar(dist_sq_at, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6 * m})
        if res.fun < best_sq:
            best_sq = float(res.fun)
            best_omega = float(res.x)
    return float(np.sqrt(max(best_sq, 0.0))), best_omega
