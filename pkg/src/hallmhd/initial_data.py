"""Construction of the annulus-supported Beltrami initial-data family.

The family is parameterized by a shell half-width ``epsilon``: a radial bump
profile supported on 1 - eps <= |xi| <= 1 + eps (identically 1 on the inner
half of the shell) seeds a divergence-free field U0 with curl U0 = |xi| U0
mode by mode, amplified by eps^{-1} sqrt(log log (1/eps)). The velocity starts
at U0 and the magnetic field at -curl U0.

Coefficients carry the lattice measure factor (2*pi/L)^3 so that the physical
field approximates the fixed band-limited profile independently of the box
size; all norms then converge to box-independent values as L grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral import (
    Grid,
    SpectralVectorField,
    curl,
    lambda_power,
)

__all__ = [
    "EPSILON_MAX",
    "BumpProfile",
    "InitialDataSet",
    "GridResolutionError",
    "build_bump",
    "build_U0",
    "fourier_l1_norm",
    "smallness_lhs",
]

# Admissible shell half-widths: 0 < eps < (2 - sqrt(2))/2. At the upper
# boundary (1 - eps)^2 = 1/2, which is what keeps every heat-decay rate on
# the shell at or above 1/2.
EPSILON_MAX = (2.0 - math.sqrt(2.0)) / 2.0


class GridResolutionError(ValueError):
    """The wavevector lattice is too coarse (or too small) for the shell."""


def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: exactly 0 for x <= 0, exactly 1 for x >= 1.

    Built from the standard flat mollifier ratio psi(x)/(psi(x)+psi(1-x)),
    psi(x) = exp(-1/x) on x > 0; the product psi(x)psi(1-x) is the classical
    exp(-1/(1-s^2)) bump up to an affine change of variable.
    """
    x = np.asarray(x, dtype=np.float64)
    lo = x <= 0.0
    hi = x >= 1.0
    mid = ~(lo | hi)
    out = np.zeros_like(x)
    out[hi] = 1.0
    xm = x[mid]
    a = np.exp(-1.0 / xm)
    b = np.exp(-1.0 / (1.0 - xm))
    out[mid] = a / (a + b)
    return out


@dataclass(frozen=True)
class BumpProfile:
    """Radial profile r -> [0, 1]: 1 on the inner half-shell, 0 off the shell."""

    epsilon: float
    profile: Callable[[np.ndarray], np.ndarray]

    def __call__(self, r) -> np.ndarray:
        arr = np.asarray(r, dtype=np.float64)
        out = self.profile(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out

    @property
    def support(self) -> tuple[float, float]:
        return (1.0 - self.epsilon, 1.0 + self.epsilon)

    @property
    def plateau(self) -> tuple[float, float]:
        return (1.0 - 0.5 * self.epsilon, 1.0 + 0.5 * self.epsilon)


def build_bump(epsilon: float) -> BumpProfile:
    """Validated shell profile for a half-width in (0, (2-sqrt(2))/2)."""
    if not (0.0 < epsilon < EPSILON_MAX):
        raise ValueError(
            f"epsilon must lie in (0, (2-sqrt(2))/2 ~= {EPSILON_MAX:.7f}), got {epsilon}"
        )
    # loglog(1/eps) must be positive; automatic here since EPSILON_MAX < 1/e.
    assert epsilon < 1.0 / math.e

    half = 0.5 * epsilon

    def profile(r: np.ndarray) -> np.ndarray:
        rise = _smooth_step((r - (1.0 - epsilon)) / half)
        fall = 1.0 - _smooth_step((r - (1.0 + half)) / half)
        out = rise * fall
        out[(r <= 1.0 - epsilon) | (r >= 1.0 + epsilon)] = 0.0
        return out

    return BumpProfile(epsilon=epsilon, profile=profile)


@dataclass(frozen=True)
class InitialDataSet:
    """Initial fields: u0 = U0 (Beltrami), b0 = -curl U0, plus metadata."""

    U0: SpectralVectorField
    u0: SpectralVectorField
    b0: SpectralVectorField
    epsilon: float
    amplitude: float

    @property
    def grid(self) -> Grid:
        return self.U0.grid


def amplitude_factor(epsilon: float) -> float:
    """The large-data prefactor eps^{-1} sqrt(log log (1/eps))."""
    return (1.0 / epsilon) * math.sqrt(math.log(math.log(1.0 / epsilon)))


def shell_mode_counts(grid: Grid, bump: BumpProfile) -> tuple[int, int]:
    """(modes on the full shell support, modes on the plateau) of the lattice."""
    r = grid.k_mag
    lo, hi = bump.support
    plo, phi = bump.plateau
    on_shell = (r > lo) & (r < hi)
    on_plateau = (r >= plo) & (r <= phi)
    return int(np.count_nonzero(on_shell)), int(np.count_nonzero(on_plateau))


def check_resolution(grid: Grid, bump: BumpProfile) -> None:
    """Reject grids whose lattice cannot represent the shell.

    Requirements: the plateau must contain at least one lattice mode (so the
    construction is nonzero and the profile's flat part is sampled) and the
    whole shell must sit inside the dealiased band.
    """
    eps = bump.epsilon
    if 1.0 + eps > grid.dealias_cutoff:
        raise GridResolutionError(
            f"shell outer radius {1.0 + eps:.3f} exceeds the dealias cutoff "
            f"{grid.dealias_cutoff:.3f}; increase n_per_axis or shrink the box"
        )
    n_shell, n_plateau = shell_mode_counts(grid, bump)
    if n_plateau == 0:
        needed = 8.0 * np.pi / eps
        raise GridResolutionError(
            f"no lattice mode falls on the profile plateau [1-eps/2, 1+eps/2] "
            f"(shell modes: {n_shell}); a box_length of at least {needed:.1f} "
            f"resolves eps = {eps}"
        )


def build_U0(grid: Grid, bump: BumpProfile) -> InitialDataSet:
    """Assemble the initial-data set on a grid that resolves the shell.

    The scalar seed a0 has lattice coefficients profile(|xi|) * (2*pi/L)^3;
    then V0 = amplitude * curl (a0, 0, 0) and U0 = V0 + |xi|^{-1} curl V0,
    evaluated with the spectral operators (so the Beltrami identity holds
    because of operator algebra, not by construction shortcut).
    """
    check_resolution(grid, bump)
    amp = amplitude_factor(bump.epsilon)

    a_hat = bump(grid.k_mag) * grid.mode_volume
    seed = np.zeros((3, grid.n, grid.n, grid.nz), dtype=np.complex128)
    seed[0] = a_hat
    V0 = amp * curl(SpectralVectorField(grid, seed))
    U0 = V0 + lambda_power(curl(V0), -0.5)
    b0 = -curl(U0)
    return InitialDataSet(U0=U0, u0=U0.copy(), b0=b0, epsilon=bump.epsilon, amplitude=amp)


def fourier_l1_norm(f: SpectralVectorField) -> float:
    """Lattice Riemann sum sum_xi |coeff(xi)| (2*pi/L)^3.

    Per-mode magnitudes are Euclidean over the three components; modes whose
    conjugate partner is not stored count twice (Hermitian pairing).
    """
    mag = np.sqrt(np.sum(f.coeffs.real ** 2 + f.coeffs.imag ** 2, axis=0))
    return float(np.sum(f.grid.hermitian_weight[0] * mag) * f.grid.mode_volume)


def smallness_lhs(data: InitialDataSet, C: float = 1.0) -> float:
    """Size functional of the initial data deciding the global-existence regime.

    C eps^4 ||U0||_L2^2 (
        ||U0_hat||_L1^2 + ||U0||_L2^2 ) exp( C (||U0_hat||_L1 + ||U0_hat||_L1^2) ).
    """
    from .spectral import l2_norm

    l1 = fourier_l1_norm(data.U0)
    l2sq = l2_norm(data.U0) ** 2
    eps = data.epsilon
    return float(C * eps ** 4 * l2sq * (l1 ** 2 + l2sq) * math.exp(C * (l1 + l1 ** 2)))
