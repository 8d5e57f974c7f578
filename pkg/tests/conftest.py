import numpy as np
import pytest

from hallmhd import Grid, SpectralVectorField, build_bump, build_U0, dealias, forward_transform


@pytest.fixture(scope="session")
def grid16():
    """Small unit-spacing box: integer wavevectors, cheap transforms."""
    return Grid(16, 2 * np.pi)


@pytest.fixture(scope="session")
def grid32():
    return Grid(32, 2 * np.pi)


@pytest.fixture(scope="session")
def grid_shell():
    """Box large enough that the spectral shell at |xi| ~ 1 is well sampled."""
    return Grid(32, 16 * np.pi)


@pytest.fixture(scope="session")
def shell_data(grid_shell):
    return build_U0(grid_shell, build_bump(0.2))


def random_field(grid: Grid, seed: int, band_limited: bool = True) -> SpectralVectorField:
    """Deterministic random real vector field, optionally dealiased."""
    rng = np.random.default_rng(seed)
    phys = rng.standard_normal((3, grid.n, grid.n, grid.n))
    f = forward_transform(grid, phys)
    return dealias(f) if band_limited else f


def single_mode_field(grid: Grid, k: tuple[int, int, int], amplitude) -> SpectralVectorField:
    """Real field from one +/-k mode pair with the given complex 3-amplitude."""
    f = SpectralVectorField.zero(grid)
    amplitude = np.asarray(amplitude, dtype=np.complex128)
    i, j, l = (idx % grid.n for idx in k)
    if l > grid.n // 2:
        i, j, l = (-k[0]) % grid.n, (-k[1]) % grid.n, (-k[2]) % grid.n
        amplitude = np.conj(amplitude)
    f.coeffs[:, i, j, l] = amplitude
    if l == 0 or l == grid.n // 2:
        ii, jj = (-i) % grid.n, (-j) % grid.n
        if (ii, jj) != (i, j):
            f.coeffs[:, ii, jj, l] = np.conj(amplitude)
        else:
            f.coeffs[:, i, j, l] = amplitude.real
    return f


def abc_field(grid: Grid, a=1.1, b=0.7, c=0.9, k0: int = 1) -> SpectralVectorField:
    """ABC-type Beltrami flow with curl u = xi0 u on the |xi| = xi0 shell."""
    x, y, z = grid.coordinates()
    shape = (grid.n, grid.n, grid.n)
    scale = k0 * grid.spacing
    phys = np.stack([
        np.broadcast_to(a * np.sin(scale * z) + c * np.cos(scale * y), shape),
        np.broadcast_to(b * np.sin(scale * x) + a * np.cos(scale * z), shape),
        np.broadcast_to(c * np.sin(scale * y) + b * np.cos(scale * x), shape),
    ])
    return forward_transform(grid, phys)
