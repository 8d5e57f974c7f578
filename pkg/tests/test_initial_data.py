"""Shell profile, Beltrami data construction, norms, and the size functional."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hallmhd import (
    EPSILON_MAX,
    Grid,
    GridResolutionError,
    SpectralVectorField,
    build_bump,
    build_U0,
    curl,
    divergence,
    fourier_l1_norm,
    inverse_transform,
    l2_norm,
    smallness_lhs,
    zygmund,
)
from hallmhd.initial_data import amplitude_factor, shell_mode_counts


class TestBump:
    def test_epsilon_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="2-sqrt"):
            build_bump(0.3)
        with pytest.raises(ValueError):
            build_bump(0.0)
        with pytest.raises(ValueError):
            build_bump(EPSILON_MAX)

    def test_plateau_value(self):
        bump = build_bump(0.2)
        assert bump(np.array([1.0]))[0] == 1.0
        assert bump(np.array([0.9001, 1.0999]))[0] == 1.0  # plateau edges inclusive
        assert bump(np.array([1.0999]))[0] == 1.0

    def test_outside_support_is_zero(self):
        bump = build_bump(0.2)
        assert np.all(bump(np.array([0.0, 0.79, 1.25, 2.0])) == 0.0)

    @settings(max_examples=30, deadline=None)
    @given(
        eps=st.floats(0.01, EPSILON_MAX - 1e-6),
        r=st.floats(0.0, 2.0),
    )
    def test_range_and_support(self, eps, r):
        bump = build_bump(eps)
        v = bump(np.array([r]))[0]
        assert 0.0 <= v <= 1.0
        if r <= 1 - eps or r >= 1 + eps:
            assert v == 0.0
        if 1 - eps / 2 <= r <= 1 + eps / 2:
            assert v == 1.0

    def test_boundary_epsilon_rate_inequality(self):
        # the admissibility bound is exactly where (1-eps)^2 reaches 1/2,
        # i.e. where the slowest shell decay rate e^{-(1-eps)^2 t} hits e^{-t/2}
        assert (1 - EPSILON_MAX) ** 2 == pytest.approx(0.5)
        for eps in (0.05, 0.15, 0.25, EPSILON_MAX):
            assert (1 - eps) ** 2 >= 0.5 - 1e-12


class TestBuildU0:
    def test_beltrami_and_divergence(self, grid_shell, shell_data):
        U0 = shell_data.U0
        assert l2_norm(curl(U0) - zygmund(U0)) / l2_norm(U0) <= 1e-12
        w = grid_shell.hermitian_weight[0]
        div_norm = np.sqrt(np.sum(w * np.abs(divergence(U0)) ** 2) * grid_shell.volume)
        assert div_norm / l2_norm(zygmund(U0)) <= 1e-12
        div_b = np.sqrt(np.sum(w * np.abs(divergence(shell_data.b0)) ** 2) * grid_shell.volume)
        assert div_b / l2_norm(zygmund(shell_data.b0)) <= 1e-12

    def test_fields_wired_together(self, shell_data):
        assert np.array_equal(shell_data.u0.coeffs, shell_data.U0.coeffs)
        diff = shell_data.b0 + curl(shell_data.U0)
        assert l2_norm(diff) <= 1e-13 * l2_norm(shell_data.b0)
        # combining both identities: b0 = -Lambda U0
        diff2 = shell_data.b0 + zygmund(shell_data.U0)
        assert l2_norm(diff2) / l2_norm(shell_data.b0) <= 1e-12

    def test_support_confined_to_annulus(self, grid_shell, shell_data):
        eps = shell_data.epsilon
        mag = np.sum(np.abs(shell_data.U0.coeffs), axis=0)
        r = grid_shell.k_mag
        outside = (r <= 1 - eps) | (r >= 1 + eps)
        assert np.all(mag[outside] == 0.0)
        assert np.any(mag[~outside] > 0.0)

    def test_first_component_closed_form(self, grid_shell, shell_data):
        # coefficient formula: amp * (xi2^2 + xi3^2) * a0(|xi|) / |xi|, real
        # and nonnegative on every mode (a0 carries the lattice measure factor)
        g = grid_shell
        c1 = shell_data.U0.coeffs[0]
        assert np.max(np.abs(c1.imag)) <= 1e-15 * max(np.max(np.abs(c1.real)), 1e-300)
        assert np.min(c1.real) >= -1e-18
        bump = build_bump(shell_data.epsilon)
        with np.errstate(invalid="ignore"):
            expected = np.where(
                g.k_mag > 0,
                shell_data.amplitude
                * (g.ky**2 + g.kz**2)
                * bump(g.k_mag)
                * g.mode_volume
                / np.where(g.k_mag > 0, g.k_mag, 1.0),
                0.0,
            )
        assert np.max(np.abs(c1.real - expected)) <= 1e-13 * np.max(expected)

    def test_physical_fields_real(self, shell_data):
        # irfft output is real by construction; round-trip confirms consistency
        phys = inverse_transform(shell_data.U0)
        assert np.isrealobj(phys)
        from hallmhd import forward_transform

        back = forward_transform(shell_data.U0.grid, phys)
        assert np.max(np.abs(back.coeffs - shell_data.U0.coeffs)) <= 1e-13 * np.max(
            np.abs(shell_data.U0.coeffs)
        )

    def test_amplitude_scaling_exact(self, shell_data):
        half = 0.5 * shell_data.U0
        assert l2_norm(half) ** 2 == pytest.approx(0.25 * l2_norm(shell_data.U0) ** 2, rel=1e-14)

    def test_unresolved_shell_raises(self):
        # spacing 2/3 leaves no lattice mode on the eps=0.05 plateau
        with pytest.raises(GridResolutionError, match="box_length"):
            build_U0(Grid(16, 3 * np.pi), build_bump(0.05))

    def test_shell_outside_dealias_band_raises(self):
        # coarse mode count on a large box: cutoff (n/3)*(2pi/L) < 1 + eps
        with pytest.raises(GridResolutionError, match="dealias"):
            build_U0(Grid(8, 8 * np.pi), build_bump(0.2))

    def test_mode_counts_grow_with_epsilon(self, grid_shell):
        n_small, _ = shell_mode_counts(grid_shell, build_bump(0.1))
        n_large, _ = shell_mode_counts(grid_shell, build_bump(0.25))
        assert 0 < n_small < n_large


class TestFourierL1:
    def test_zero_field(self, grid16):
        assert fourier_l1_norm(SpectralVectorField.zero(grid16)) == 0.0

    def test_two_conjugate_modes(self, grid16):
        f = SpectralVectorField.zero(grid16)
        a = 0.7
        f.coeffs[0, 2, 0, 0] = a
        f.coeffs[0, 14, 0, 0] = a
        assert fourier_l1_norm(f) == pytest.approx(2 * a * grid16.mode_volume)

    def test_half_spectrum_mode_counts_twice(self, grid16):
        f = SpectralVectorField.zero(grid16)
        f.coeffs[0, 0, 0, 2] = 1.0  # conjugate partner not stored
        assert fourier_l1_norm(f) == pytest.approx(2 * grid16.mode_volume)

    def test_loglog_scaling_between_epsilons(self, grid_shell):
        l1 = {}
        for eps in (0.05, 0.1):
            data = build_U0(grid_shell, build_bump(eps))
            l1[eps] = fourier_l1_norm(data.U0)
        measured = l1[0.1] / l1[0.05]
        expected = math.sqrt(
            math.log(math.log(10.0)) / math.log(math.log(20.0))
        )
        assert abs(measured / expected - 1.0) <= 0.25


class TestSmallness:
    def test_zero_data_gives_zero(self, grid16):
        zero = SpectralVectorField.zero(grid16)
        data_like = type("D", (), {})()
        from hallmhd import InitialDataSet

        data = InitialDataSet(U0=zero, u0=zero, b0=zero, epsilon=0.2, amplitude=1.0)
        assert smallness_lhs(data) == 0.0

    def test_monotone_in_C(self, shell_data):
        values = [smallness_lhs(shell_data, C) for C in (0.5, 1.0, 2.0, 4.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    @settings(max_examples=20, deadline=None)
    @given(c=st.floats(0.1, 10.0))
    def test_doubling_C_never_decreases(self, shell_data, c):
        assert smallness_lhs(shell_data, 2 * c) >= smallness_lhs(shell_data, c)

    def test_deterministic(self, shell_data):
        assert smallness_lhs(shell_data) == smallness_lhs(shell_data)

    def test_amplitude_factor_positive_and_decreasing(self):
        vals = [amplitude_factor(e) for e in (0.05, 0.1, 0.2, 0.25)]
        assert all(v > 0 for v in vals)
        assert vals == sorted(vals, reverse=True)
