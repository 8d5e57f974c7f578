"""Norms, defect suite, energy ledger, decay fits, bootstrap monitoring."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hallmhd import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    Grid,
    RunConfig,
    SimState,
    SpectralVectorField,
    bootstrap_monitor,
    build_bump,
    build_U0,
    compute_record,
    decay_fit,
    defect_suite,
    energy_budget,
    evolve,
    gradient,
    heat_semigroup,
    inverse_transform,
    l2_norm,
    lebesgue_norms,
    shell_multiplier_norm,
    sobolev_norm,
    zygmund,
)

from conftest import random_field, single_mode_field


def make_record(t, bq=0.0, l2u=1.0, l2b=1.0, cum=0.0, resid=0.0):
    return DiagnosticsRecord(
        t=t, l2_u=l2u, l2_b=l2b, linf_u=0.0, linf_b=0.0, h3_v=np.sqrt(bq / 2), h3_c=np.sqrt(bq / 2),
        bootstrap_quantity=bq, div_defect_u=0.0, div_defect_b=0.0, omega_defect=0.0,
        beltrami_defect_U=0.0, energy_residual=resid, shell_multiplier_norm=0.0,
        cumulative_dissipation=cum,
    )


class TestSobolev:
    def test_s0_matches_physical_l2(self, grid16):
        f = random_field(grid16, seed=1)
        phys = inverse_transform(f)
        phys_norm = np.sqrt(np.sum(phys**2) * grid16.cell_volume)
        assert sobolev_norm(f, 0.0) == pytest.approx(phys_norm, rel=1e-12)
        assert sobolev_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-14)

    def test_single_unit_mode_h3(self, grid16):
        # unit L2 amplitude at |xi| = 1 gives (1 + 1)^{3/2} = 2 sqrt(2)
        f = single_mode_field(grid16, (1, 0, 0), (0.0, 1.0, 0.0))
        f = (1.0 / l2_norm(f)) * f
        assert sobolev_norm(f, 3.0) == pytest.approx(2.0 ** 1.5, rel=1e-12)

    def test_shell_gradient_comparison(self, grid_shell, shell_data):
        # || |xi| f ||_{H^2} <= ||f||_{H^3} for any field: |xi| <= (1+|xi|^2)^{1/2}
        f = shell_data.U0
        assert sobolev_norm(zygmund(f), 2.0) <= sobolev_norm(f, 3.0) * (1 + 1e-13)

    def test_monotone_in_s(self, grid16):
        f = random_field(grid16, seed=2)
        norms = [sobolev_norm(f, s) for s in (0.0, 1.0, 2.0, 3.0)]
        assert all(b >= a for a, b in zip(norms, norms[1:]))


class TestLebesgue:
    def test_constant_field(self, grid16):
        f = SpectralVectorField.zero(grid16)
        f.coeffs[0, 0, 0, 0] = 2.5
        l2, l3, linf = lebesgue_norms(f)
        vol = grid16.volume
        assert linf == pytest.approx(2.5)
        assert l2 == pytest.approx(2.5 * np.sqrt(vol), rel=1e-12)
        assert l3 == pytest.approx(2.5 * vol ** (1 / 3), rel=1e-12)

    def test_zero_field(self, grid16):
        assert lebesgue_norms(SpectralVectorField.zero(grid16)) == (0.0, 0.0, 0.0)

    def test_linf_bounded_by_coefficient_sum(self, grid_shell, shell_data):
        # triangle inequality: sup |f| <= sum over modes of |coeff|
        from hallmhd import fourier_l1_norm

        _, _, linf = lebesgue_norms(shell_data.U0)
        coeff_sum = fourier_l1_norm(shell_data.U0) / shell_data.grid.mode_volume
        assert linf <= coeff_sum + 1e-10

    def test_oversampling_refines_linf(self, grid16):
        f = single_mode_field(grid16, (1, 1, 1), (1.0, -0.5, 0.25j))
        _, _, coarse = lebesgue_norms(f, oversample=1)
        _, _, fine = lebesgue_norms(f, oversample=2)
        assert fine >= coarse - 1e-13
        # the oversampled grid cannot overshoot the true band-limited maximum
        s = (2.0 + 1e-12) * np.sum(np.abs(f.coeffs))
        assert fine <= s


class TestDefectSuite:
    def test_clean_at_time_zero(self, grid_shell, shell_data):
        state = SimState(0.0, shell_data.u0.copy(), shell_data.b0.copy())
        div_u, div_b, omega, beltrami = defect_suite(state, shell_data)
        assert div_u <= 1e-12 and div_b <= 1e-12
        assert omega <= 1e-12 * l2_norm(shell_data.b0)
        assert beltrami <= 1e-12

    def test_gradient_pollution_detected(self, grid_shell, shell_data):
        rng = np.random.default_rng(5)
        scalar = np.zeros((grid_shell.n,) * 2 + (grid_shell.nz,), dtype=np.complex128)
        scalar[1, 2, 3] = 0.5 + 0.25j
        g = gradient(grid_shell, scalar)
        state = SimState(0.0, shell_data.u0 + g, shell_data.b0.copy())
        div_u, div_b, _, _ = defect_suite(state, shell_data)
        assert div_u > 1e-3
        assert div_b <= 1e-12

    def test_omega_defect_blind_to_gradients_in_u(self, grid_shell, shell_data):
        scalar = np.zeros((grid_shell.n,) * 2 + (grid_shell.nz,), dtype=np.complex128)
        scalar[2, 1, 1] = 1.0
        g = gradient(grid_shell, scalar)
        s0 = SimState(0.0, shell_data.u0.copy(), shell_data.b0.copy())
        s1 = SimState(0.0, shell_data.u0 + g, shell_data.b0.copy())
        _, _, om0, _ = defect_suite(s0, shell_data)
        _, _, om1, _ = defect_suite(s1, shell_data)
        assert om1 == pytest.approx(om0, abs=1e-12 * max(l2_norm(shell_data.b0), 1.0))

    def test_heat_only_flow_keeps_omega_zero(self, grid_shell, shell_data):
        # advance both fields with the exact heat factor only: the curl
        # relation commutes with the semigroup
        for t in (0.3, 1.7):
            state = SimState(
                t, heat_semigroup(shell_data.u0, t), heat_semigroup(shell_data.b0, t)
            )
            _, _, omega, beltrami = defect_suite(state, shell_data)
            assert omega <= 1e-12 * l2_norm(state.b_hat)
            assert beltrami <= 1e-12


class TestEnergyBudget:
    def test_zero_records(self):
        assert energy_budget(make_record(0.0, l2u=0, l2b=0), make_record(1.0, l2u=0, l2b=0), 0.0) == 0.0

    def test_non_consecutive_rejected(self):
        with pytest.raises(ValueError):
            energy_budget(make_record(1.0), make_record(1.0), 0.0)

    def test_heat_only_single_mode_closed_form(self):
        # exact-factor stepping of one mode: E(t) = E0 exp(-2 k^2 t); the
        # pipeline's Simpson accumulation must close the ledger to ~1e-12 E0
        g = Grid(16, 2 * np.pi)
        u = single_mode_field(g, (1, 1, 0), (0.5, -0.5, 0.0))  # div-free: k.(a)=0
        state = SimState(0.0, u, SpectralVectorField.zero(g))
        cfg = RunConfig(epsilon=0.2, n_per_axis=16, box_length=2 * np.pi, dt=1e-3,
                        t_end=0.2, output_cadence=50)
        data = build_U0(g, build_bump(0.2))
        records = []
        evolve(state, cfg, lambda s, cum: records.append((s, cum)))
        E = []
        for s, cum in records:
            E.append((s.t, 0.5 * (l2_norm(s.u_hat) ** 2 + l2_norm(s.b_hat) ** 2), cum))
        E0 = E[0][1]
        k2 = 2.0
        for (t0, e0, c0), (t1, e1, c1) in zip(E, E[1:]):
            resid = (e1 - e0) + (c1 - c0)
            assert abs(resid) <= 1e-10 * E0
            # and matches the closed form
            assert e1 == pytest.approx(E0 * np.exp(-2 * k2 * t1), rel=1e-10)

    def test_full_run_energy_ledger_small(self, grid_shell, shell_data):
        cfg = RunConfig(epsilon=0.2, n_per_axis=32, box_length=16 * np.pi, dt=1e-3,
                        t_end=0.1, output_cadence=25)
        state = SimState(0.0, shell_data.u0.copy(), shell_data.b0.copy())
        recs = []
        prev = None

        def obs(s, cum):
            nonlocal prev
            rec = compute_record(s, shell_data, cum, prev=prev)
            recs.append(rec)
            prev = rec

        evolve(state, cfg, obs)
        E0 = recs[0].energy
        for a, b in zip(recs, recs[1:]):
            assert abs(b.energy_residual) / (b.t - a.t) <= 1e-6 * E0


class TestShellMultiplier:
    def test_unit_sphere_mode_vanishes(self, grid16):
        f = single_mode_field(grid16, (0, 1, 0), (1.0, 0.0, 1.0))
        assert shell_multiplier_norm(f, 3.0) <= 1e-15 * sobolev_norm(f, 3.0)

    def test_known_factor_at_off_shell_mode(self, grid_shell):
        # |xi| = 1.25 -> (1 - 1.25)^2 = 0.0625 exactly
        f = single_mode_field(grid_shell, (10, 0, 0), (0.0, 1.0, 0.0))
        assert shell_multiplier_norm(f, 2.0) == pytest.approx(0.0625 * sobolev_norm(f, 2.0), rel=1e-13)

    @pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
    def test_bounded_by_eps_squared_on_shell_data(self, grid_shell, eps):
        data = build_U0(grid_shell, build_bump(eps))
        lhs = shell_multiplier_norm(data.U0, 3.0)
        assert lhs <= eps**2 * sobolev_norm(data.U0, 3.0) * (1 + 1e-12)


class TestDecayFit:
    def test_exact_exponential(self):
        ts = np.linspace(0, 3, 20)
        rate, r2 = decay_fit([(t, np.exp(-0.9 * t)) for t in ts])
        assert rate == pytest.approx(0.9, abs=1e-10)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_constant_series(self):
        rate, r2 = decay_fit([(t, 2.0) for t in (0.0, 1.0, 2.0)])
        assert rate == pytest.approx(0.0, abs=1e-14)

    def test_too_few_or_nonpositive(self):
        with pytest.raises(ValueError):
            decay_fit([(0.0, 1.0), (1.0, 0.5)])
        with pytest.raises(ValueError):
            decay_fit([(0.0, 1.0), (1.0, 0.0), (2.0, 0.5)])

    @settings(max_examples=25, deadline=None)
    @given(rate=st.floats(-2.0, 5.0), amp=st.floats(0.01, 100.0))
    def test_recovers_any_rate(self, rate, amp):
        ts = np.linspace(0, 2, 10)
        est, r2 = decay_fit([(t, amp * np.exp(-rate * t)) for t in ts])
        assert est == pytest.approx(rate, abs=1e-8)
        assert r2 >= 1.0 - 1e-9 or abs(rate) < 1e-6

    def test_heat_reference_rate_bracketed(self, grid_shell, shell_data):
        ts = np.linspace(0.0, 3.0, 31)
        series = [(t, l2_norm(heat_semigroup(shell_data.U0, t))) for t in ts]
        rate, r2 = decay_fit(series)
        eps = shell_data.epsilon
        assert (1 - eps) ** 2 * 0.99 <= rate <= (1 + eps) ** 2 * 1.01
        assert rate >= 0.5
        assert r2 >= 0.999


class TestBootstrapMonitor:
    def test_all_zero(self):
        recs = [make_record(t) for t in (0.0, 1.0, 2.0)]
        assert bootstrap_monitor(recs, 1.0) == (0.0, None)

    def test_crossing_detected_at_known_time(self):
        recs = [make_record(t, bq=v) for t, v in [(0.0, 0.0), (0.5, 0.2), (1.0, 0.6), (1.5, 0.9)]]
        sup, when = bootstrap_monitor(recs, 0.5)
        assert sup == pytest.approx(0.9)
        assert when == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bootstrap_monitor([], 1.0)


class TestRecordAssembly:
    def test_record_fields_and_csv_round_trip(self, grid_shell, shell_data):
        state = SimState(0.0, shell_data.u0.copy(), shell_data.b0.copy())
        rec = compute_record(state, shell_data, 0.0)
        assert rec.bootstrap_quantity == rec.h3_v**2 + rec.h3_c**2
        assert rec.is_finite and rec.decay_envelope_ok
        row = rec.csv_row()
        assert len(row) == len(CSV_COLUMNS)
        back = DiagnosticsRecord.from_csv_row([float(repr(v)) for v in row])
        assert back.csv_row() == row
