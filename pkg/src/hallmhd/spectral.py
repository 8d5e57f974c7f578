"""Fourier representation of periodic vector fields and multiplier operators.

Conventions used throughout the package:

* The domain is the periodic box [0, L)^3 sampled on an n^3 collocation grid.
* Wavevectors are xi = 2*pi*k/L with integer k in {-n/2+1, ..., n/2} per axis.
* Spectral coefficients follow the Fourier-series normalization: the forward
  transform carries 1/n^3, so f(x) = sum_k c_k exp(i xi_k . x) and a constant
  field has c_0 equal to its value.
* Real fields are stored as half-spectra (rfft layout along the last axis),
  which bakes in Hermitian symmetry everywhere except the kz = 0 and
  kz = n/2 planes; those are checked by ``SpectralVectorField.validate``.
* Parseval: the physical L2 norm equals sqrt(V * sum_k w_k |c_k|^2) with
  V = L^3 and w_k the Hermitian pairing weight (2 for modes whose conjugate
  partner is not stored, 1 on the self-conjugate planes).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

__all__ = [
    "Grid",
    "SpectralVectorField",
    "SingularSymbolError",
    "forward_transform",
    "inverse_transform",
    "transform",
    "apply_multiplier",
    "curl",
    "divergence",
    "gradient",
    "lambda_power",
    "zygmund",
    "leray_project",
    "heat_semigroup",
    "dealias",
    "pointwise_product",
    "l2_norm",
    "l2_inner",
    "enable_debug_checks",
]


class SingularSymbolError(ValueError):
    """A Fourier symbol is singular at a mode carrying a nonzero coefficient."""


# ---------------------------------------------------------------------------
# FFT backend: torch (if importable) is noticeably faster on few-core CPUs;
# scipy.fft is the default and always available. Override with
# HALLMHD_FFT=scipy|torch.
# ---------------------------------------------------------------------------

def _pick_fft_backend() -> str:
    choice = os.environ.get("HALLMHD_FFT", "auto")
    if choice == "scipy":
        return "scipy"
    if choice in ("torch", "auto"):
        try:
            import torch  # noqa: F401

            return "torch"
        except ImportError:
            if choice == "torch":
                raise
    return "scipy"


_FFT_BACKEND = _pick_fft_backend()
_FFT_WORKERS = min(os.cpu_count() or 1, 8)

if _FFT_BACKEND == "torch":
    import torch as _torch

    _torch.set_num_threads(_FFT_WORKERS)


def rfftn_batch(phys: np.ndarray) -> np.ndarray:
    """Forward real FFT over the last three axes of a (..., n, n, n) array."""
    if _FFT_BACKEND == "torch":
        return _torch.fft.rfftn(_torch.from_numpy(np.ascontiguousarray(phys)), dim=(-3, -2, -1)).numpy()
    import scipy.fft as sfft

    return sfft.rfftn(phys, axes=(-3, -2, -1), workers=_FFT_WORKERS)


def irfftn_batch(spec: np.ndarray, n: int, out: np.ndarray | None = None) -> np.ndarray:
    """Inverse real FFT over the last three axes, physical size n per axis."""
    if _FFT_BACKEND == "torch":
        t = _torch.fft.irfftn(_torch.from_numpy(np.ascontiguousarray(spec)), s=(n, n, n), dim=(-3, -2, -1),
                              out=None if out is None else _torch.from_numpy(out))
        return t.numpy()
    import scipy.fft as sfft

    res = sfft.irfftn(spec, s=(n, n, n), axes=(-3, -2, -1), workers=_FFT_WORKERS)
    if out is not None:
        out[...] = res
        return out
    return res


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Periodic-box discretization: n modes per axis on a box of side L."""

    n: int
    box_length: float

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"n_per_axis must be even and >= 8, got {self.n}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @property
    def nz(self) -> int:
        """Stored modes along the last (half-spectrum) axis."""
        return self.n // 2 + 1

    @property
    def spacing(self) -> float:
        """Wavevector lattice spacing 2*pi/L."""
        return 2.0 * np.pi / self.box_length

    @property
    def volume(self) -> float:
        return self.box_length ** 3

    @property
    def cell_volume(self) -> float:
        """Physical quadrature weight dx^3."""
        return (self.box_length / self.n) ** 3

    @property
    def mode_volume(self) -> float:
        """Spectral quadrature weight (2*pi/L)^3."""
        return self.spacing ** 3

    @cached_property
    def k_index(self) -> np.ndarray:
        """Signed integer mode numbers {0, 1, ..., n/2, -n/2+1, ..., -1}."""
        i = np.arange(self.n)
        return np.where(i <= self.n // 2, i, i - self.n)

    @cached_property
    def k1(self) -> np.ndarray:
        """1D wavevector components 2*pi*k/L, full-axis layout."""
        return self.k_index * self.spacing

    @cached_property
    def k1z(self) -> np.ndarray:
        """Wavevector components along the stored half axis (all >= 0)."""
        return self.k1[: self.nz].copy()

    @cached_property
    def kx(self) -> np.ndarray:
        return self.k1[:, None, None]

    @cached_property
    def ky(self) -> np.ndarray:
        return self.k1[None, :, None]

    @cached_property
    def kz(self) -> np.ndarray:
        return self.k1z[None, None, :]

    @cached_property
    def k_sq(self) -> np.ndarray:
        return self.kx ** 2 + self.ky ** 2 + self.kz ** 2

    @cached_property
    def k_mag(self) -> np.ndarray:
        return np.sqrt(self.k_sq)

    @cached_property
    def hermitian_weight(self) -> np.ndarray:
        """Pairing weight per stored mode: 2 unless the conjugate is also stored."""
        w = np.full((1, 1, self.nz), 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0
        return w

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: True where every |k_j| <= n/3."""
        cutoff = self.n // 3
        keep = np.abs(self.k_index) <= cutoff
        keepz = keep[: self.nz]
        return keep[:, None, None] & keep[None, :, None] & keepz[None, None, :]

    @property
    def dealias_cutoff(self) -> float:
        """Largest retained |xi_j| component after dealiasing."""
        return (self.n // 3) * self.spacing

    def wavevector(self, k: tuple[int, int, int]) -> np.ndarray:
        """Wavevector xi for an integer mode triple (any signs; aliased mod n)."""
        k = np.asarray(k)
        folded = (k + self.n // 2 - 1) % self.n - (self.n // 2 - 1)
        return folded * self.spacing

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Collocation point coordinates as three broadcastable arrays."""
        x = np.arange(self.n) * (self.box_length / self.n)
        return x[:, None, None], x[None, :, None], x[None, None, :]


# ---------------------------------------------------------------------------
# Field container
# ---------------------------------------------------------------------------

_debug_checks = False


def enable_debug_checks(on: bool = True) -> None:
    """Toggle Hermitian-symmetry validation after every operator application."""
    global _debug_checks
    _debug_checks = on


@dataclass
class SpectralVectorField:
    """Three-component vector field stored as half-spectrum coefficients.

    ``coeffs`` has shape (3, n, n, n//2 + 1), complex128, in the Fourier-series
    normalization described in the module docstring.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        expected = (3, self.grid.n, self.grid.n, self.grid.nz)
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient array has shape {self.coeffs.shape}, expected {expected}")

    @classmethod
    def zero(cls, grid: Grid) -> "SpectralVectorField":
        return cls(grid, np.zeros((3, grid.n, grid.n, grid.nz), dtype=np.complex128))

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coeffs.copy())

    def __add__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self._check_same_grid(other)
        return SpectralVectorField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self._check_same_grid(other)
        return SpectralVectorField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, -self.coeffs)

    def _check_same_grid(self, other: "SpectralVectorField") -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def mean_mode(self) -> np.ndarray:
        return self.coeffs[:, 0, 0, 0]

    def is_mean_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.mean_mode()) <= tol))

    def validate(self, tol: float = 1e-13) -> None:
        """Check Hermitian symmetry on the self-conjugate kz planes.

        Half-spectrum storage guarantees coeff(-xi) = conj(coeff(xi)) for
        0 < kz < n/2 structurally; only the kz = 0 and kz = n/2 planes can
        drift, and only there is an explicit check needed.
        """
        scale = np.max(np.abs(self.coeffs)) or 1.0
        for plane in (0, self.grid.nz - 1):
            p = self.coeffs[..., plane]
            mirrored = np.conj(p[:, _flip_index(self.grid.n)][:, :, _flip_index(self.grid.n)])
            defect = np.max(np.abs(p - mirrored))
            if defect > tol * scale:
                raise ValueError(f"Hermitian symmetry violated on kz-plane {plane}: defect {defect:.3e}")


def _flip_index(n: int) -> np.ndarray:
    """Index permutation sending mode k to -k (mod n) along a full axis."""
    return (-np.arange(n)) % n


def _maybe_validate(f: SpectralVectorField) -> SpectralVectorField:
    if _debug_checks:
        f.validate()
    return f


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def forward_transform(grid: Grid, phys: np.ndarray) -> SpectralVectorField:
    """Physical samples (3, n, n, n), real -> spectral coefficients."""
    phys = np.asarray(phys)
    if phys.shape != (3, grid.n, grid.n, grid.n):
        raise ValueError(f"physical array has shape {phys.shape}, expected {(3, grid.n, grid.n, grid.n)}")
    if np.iscomplexobj(phys):
        if np.max(np.abs(phys.imag)) > 1e-13 * max(np.max(np.abs(phys.real)), 1.0):
            raise ValueError("forward transform input must be real-valued")
        phys = phys.real
    coeffs = rfftn_batch(phys.astype(np.float64)) / grid.n ** 3
    return SpectralVectorField(grid, coeffs)


def inverse_transform(f: SpectralVectorField) -> np.ndarray:
    """Spectral coefficients -> physical samples (3, n, n, n), real."""
    return irfftn_batch(f.coeffs * f.grid.n ** 3, f.grid.n)


def transform(obj, direction: str, grid: Grid | None = None):
    """Spec-style dispatcher: ``forward`` on arrays, ``inverse`` on fields."""
    if direction == "forward":
        if grid is None:
            raise ValueError("forward transform needs a grid")
        return forward_transform(grid, obj)
    if direction == "inverse":
        return inverse_transform(obj)
    raise ValueError(f"unknown transform direction {direction!r}")


# ---------------------------------------------------------------------------
# Multiplier operators
# ---------------------------------------------------------------------------

Symbol = Union[np.ndarray, Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]]


def apply_multiplier(f: SpectralVectorField, symbol: Symbol) -> SpectralVectorField:
    """Apply a Fourier multiplier m(xi) to every coefficient.

    ``symbol`` is either an array broadcastable against the coefficient layout
    (scalar symbol, or a (3, 3, ...) matrix symbol contracted against the
    component axis) or a callable evaluated on the broadcast wavevector
    components. Non-finite symbol values are allowed only at modes whose
    coefficients vanish; there the output is set to zero.
    """
    g = f.grid
    m = symbol(g.kx, g.ky, g.kz) if callable(symbol) else np.asarray(symbol)
    matrix_valued = m.ndim >= 4 and m.shape[:2] == (3, 3)
    bad = ~np.all(np.isfinite(m), axis=(0, 1)) if matrix_valued else ~np.isfinite(m)
    if np.any(bad):
        bad = np.broadcast_to(bad, f.coeffs.shape[1:])
        if np.any(np.abs(f.coeffs[:, bad]) > 0):
            raise SingularSymbolError("symbol is singular at a mode with nonzero coefficient")
        m = np.where(bad, 0.0, m)
    if matrix_valued:
        out = np.einsum("ij...,j...->i...", m, f.coeffs)
    else:
        out = m * f.coeffs
    return _maybe_validate(SpectralVectorField(g, out))


def curl(f: SpectralVectorField) -> SpectralVectorField:
    """curl in spectral space: coeff_out = i xi x coeff_in."""
    g = f.grid
    u = f.coeffs
    out = np.empty_like(u)
    out[0] = 1j * (g.ky * u[2] - g.kz * u[1])
    out[1] = 1j * (g.kz * u[0] - g.kx * u[2])
    out[2] = 1j * (g.kx * u[1] - g.ky * u[0])
    return _maybe_validate(SpectralVectorField(g, out))


def divergence(f: SpectralVectorField) -> np.ndarray:
    """Scalar spectral field i xi . coeff."""
    g = f.grid
    u = f.coeffs
    return 1j * (g.kx * u[0] + g.ky * u[1] + g.kz * u[2])


def gradient(grid: Grid, scalar: np.ndarray) -> SpectralVectorField:
    """Gradient of a scalar half-spectrum: component i = i xi_i s."""
    out = np.empty((3, grid.n, grid.n, grid.nz), dtype=np.complex128)
    out[0] = 1j * grid.kx * scalar
    out[1] = 1j * grid.ky * scalar
    out[2] = 1j * grid.kz * scalar
    return _maybe_validate(SpectralVectorField(grid, out))


def lambda_power(f: SpectralVectorField, gamma: float) -> SpectralVectorField:
    """Fractional power operator with symbol |xi|^(2*gamma).

    Note the doubled-exponent convention: ``gamma = 1/2`` gives the Zygmund
    operator with symbol |xi| (the square root of minus the Laplacian) used in
    every Beltrami identity here, and ``gamma = 1`` gives minus the Laplacian.
    Negative powers require a mean-zero field; the symbol at xi = 0 is then
    defined as 0.
    """
    g = f.grid
    if gamma == 0.0:
        return f.copy()
    expo = 2.0 * gamma
    if expo < 0:
        if not f.is_mean_zero():
            raise SingularSymbolError("negative power of |xi| requires a mean-zero field")
        mag = g.k_mag
        m = np.zeros_like(mag)
        nz = mag > 0
        m[nz] = mag[nz] ** expo
    else:
        m = g.k_mag ** expo
    out = m * f.coeffs
    if expo < 0:
        out[:, 0, 0, 0] = 0.0
    return _maybe_validate(SpectralVectorField(g, out))


def zygmund(f: SpectralVectorField) -> SpectralVectorField:
    """Square-root of minus the Laplacian: symbol |xi|."""
    return lambda_power(f, 0.5)


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Project onto divergence-free fields: coeff -= xi (xi . coeff)/|xi|^2."""
    g = f.grid
    u = f.coeffs
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_k2 = np.where(g.k_sq > 0, 1.0 / np.where(g.k_sq > 0, g.k_sq, 1.0), 0.0)
    dot = (g.kx * u[0] + g.ky * u[1] + g.kz * u[2]) * inv_k2
    out = np.empty_like(u)
    out[0] = u[0] - g.kx * dot
    out[1] = u[1] - g.ky * dot
    out[2] = u[2] - g.kz * dot
    return _maybe_validate(SpectralVectorField(g, out))


def heat_semigroup(f: SpectralVectorField, t: float) -> SpectralVectorField:
    """Exact heat flow exp(t Laplacian): multiplier exp(-|xi|^2 t), t >= 0."""
    if t < 0:
        raise ValueError(f"heat semigroup time must be nonnegative, got {t}")
    return _maybe_validate(SpectralVectorField(f.grid, np.exp(-f.grid.k_sq * t) * f.coeffs))


def dealias(f: SpectralVectorField) -> SpectralVectorField:
    """2/3-rule truncation: zero every mode with any |k_j| > n/3."""
    return _maybe_validate(SpectralVectorField(f.grid, f.coeffs * f.grid.dealias_mask))


# ---------------------------------------------------------------------------
# Pseudo-spectral products
# ---------------------------------------------------------------------------


def pointwise_product(f: SpectralVectorField, g: SpectralVectorField, form: str):
    """Dealiased pseudo-spectral product of two vector fields.

    form='cross'      returns f x g as a SpectralVectorField.
    form='advection'  returns (f . grad) g as a SpectralVectorField.
    form='outer'      returns the rank-2 product f_i g_j as a raw complex
                      array of shape (3, 3, n, n, n//2+1).
    """
    if f.grid != g.grid:
        raise ValueError("pointwise product requires both fields on the same grid")
    grid = f.grid
    fp = inverse_transform(f)
    if form == "cross":
        gp = inverse_transform(g)
        prod = np.cross(fp, gp, axis=0)
        return dealias(forward_transform(grid, prod))
    if form == "advection":
        prod = np.zeros((3, grid.n, grid.n, grid.n))
        for j, kj in enumerate((grid.kx, grid.ky, grid.kz)):
            dg = SpectralVectorField(grid, 1j * kj * g.coeffs)
            prod += fp[j] * inverse_transform(dg)
        return dealias(forward_transform(grid, prod))
    if form == "outer":
        gp = inverse_transform(g)
        outer = np.einsum("i...,j...->ij...", fp, gp)
        spec = rfftn_batch(outer.reshape(9, grid.n, grid.n, grid.n)) / grid.n ** 3
        spec *= grid.dealias_mask
        return spec.reshape(3, 3, grid.n, grid.n, grid.nz)
    raise ValueError(f"unknown product form {form!r}")


# ---------------------------------------------------------------------------
# Norms (Parseval on the lattice)
# ---------------------------------------------------------------------------


def l2_inner(f: SpectralVectorField, g: SpectralVectorField) -> float:
    """Discrete L2 inner product int f . g dx computed spectrally."""
    f._check_same_grid(g)
    w = f.grid.hermitian_weight
    return float(np.sum(w * (f.coeffs * np.conj(g.coeffs)).real) * f.grid.volume)


def l2_norm(f: SpectralVectorField) -> float:
    w = f.grid.hermitian_weight
    mag2 = (f.coeffs.real ** 2 + f.coeffs.imag ** 2)
    return float(np.sqrt(np.sum(w * mag2) * f.grid.volume))
