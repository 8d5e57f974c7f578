"""Norms, defects, decay fits, and energy bookkeeping for simulation records.

One DiagnosticsRecord is produced per observation time; the CSV column order
is fixed by the harness contract (see ``CSV_COLUMNS``).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .dynamics import SimState, heat_reference, perturbation
from .initial_data import InitialDataSet
from .spectral import (
    SpectralVectorField,
    curl,
    divergence,
    irfftn_batch,
    l2_norm,
    zygmund,
)

__all__ = [
    "DiagnosticsRecord",
    "CSV_COLUMNS",
    "sobolev_norm",
    "lebesgue_norms",
    "defect_suite",
    "energy_budget",
    "shell_multiplier_norm",
    "decay_fit",
    "bootstrap_monitor",
    "compute_record",
]

CSV_COLUMNS = (
    "t",
    "l2_u",
    "l2_b",
    "linf_u",
    "linf_b",
    "h3_v",
    "h3_c",
    "bootstrap_quantity",
    "div_defect_u",
    "div_defect_b",
    "omega_defect",
    "beltrami_defect_U",
    "energy_residual",
    "shell_multiplier_norm",
)


@dataclass
class DiagnosticsRecord:
    t: float
    l2_u: float
    l2_b: float
    linf_u: float
    linf_b: float
    h3_v: float
    h3_c: float
    bootstrap_quantity: float
    div_defect_u: float
    div_defect_b: float
    omega_defect: float
    beltrami_defect_U: float
    energy_residual: float
    shell_multiplier_norm: float
    decay_envelope_ok: bool = True
    cumulative_dissipation: float = 0.0

    @property
    def is_finite(self) -> bool:
        return all(np.isfinite(getattr(self, c)) for c in CSV_COLUMNS)

    @property
    def energy(self) -> float:
        return 0.5 * (self.l2_u ** 2 + self.l2_b ** 2)

    def csv_row(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]

    @classmethod
    def from_csv_row(cls, values: Sequence[float]) -> "DiagnosticsRecord":
        return cls(**dict(zip(CSV_COLUMNS, values)))


def sobolev_norm(f: SpectralVectorField, s: float) -> float:
    """H^s norm: sqrt( V sum_k w_k (1+|xi|^2)^s |c_k|^2 ); s=0 is the L2 norm."""
    g = f.grid
    mag2 = np.sum(f.coeffs.real ** 2 + f.coeffs.imag ** 2, axis=0)
    weight = (1.0 + g.k_sq) ** s if s != 0 else 1.0
    return float(np.sqrt(np.sum(g.hermitian_weight * weight * mag2) * g.volume))


def lebesgue_norms(f: SpectralVectorField, oversample: int = 1) -> tuple[float, float, float]:
    """(L2, L3, Linf) by physical-space quadrature of the vector magnitude.

    ``oversample`` > 1 evaluates on a refined collocation grid (zero-padded
    spectrum), sharpening the Linf estimate for band-limited fields.
    """
    g = f.grid
    if oversample == 1:
        phys = irfftn_batch(f.coeffs * g.n ** 3, g.n)
        cell = g.cell_volume
    else:
        m = oversample * g.n
        mz = m // 2 + 1
        padded = np.zeros((3, m, m, mz), dtype=np.complex128)
        half = g.n // 2
        idx = np.concatenate([np.arange(half + 1), m - np.arange(half - 1, 0, -1)])
        padded[:, idx[:, None], idx[None, :], : g.nz] = f.coeffs
        phys = irfftn_batch(padded * m ** 3, m)
        cell = (g.box_length / m) ** 3
    mag = np.sqrt(np.sum(phys ** 2, axis=0))
    l2 = float(np.sqrt(np.sum(mag ** 2) * cell))
    l3 = float(np.cbrt(np.sum(mag ** 3) * cell))
    linf = float(np.max(mag))
    return l2, l3, linf


def _div_defect(f: SpectralVectorField) -> float:
    """||div f||_L2 relative to the gradient scale || |xi| f ||_L2."""
    g = f.grid
    div_mag2 = np.abs(divergence(f)) ** 2
    div_norm = np.sqrt(np.sum(g.hermitian_weight[0] * div_mag2) * g.volume)
    grad_scale = l2_norm(zygmund(f))
    if grad_scale == 0.0:
        return 0.0
    return float(div_norm / grad_scale)


def defect_suite(state: SimState, data: InitialDataSet) -> tuple[float, float, float, float]:
    """(div_u, div_b, omega, beltrami) defects at the state's time.

    div defects are relative (see _div_defect); omega is the absolute L2 norm
    of curl u + b; beltrami is the relative defect of curl U(t) - |xi| U(t)
    for the heat reference (zero up to round-off since multipliers commute).
    """
    div_u = _div_defect(state.u_hat)
    div_b = _div_defect(state.b_hat)
    omega = l2_norm(curl(state.u_hat) + state.b_hat)
    U, _ = heat_reference(data, state.t)
    u_scale = l2_norm(U)
    beltrami = l2_norm(curl(U) - zygmund(U)) / u_scale if u_scale > 0 else 0.0
    return div_u, div_b, omega, beltrami


def energy_budget(prev: DiagnosticsRecord, next: DiagnosticsRecord, dissipation_integral: float) -> float:
    """Discrete energy-balance residual over one record interval.

    residual = [E(next) - E(prev)] + integral of (||grad u||^2 + ||grad b||^2),
    with E = (||u||^2 + ||b||^2)/2. Zero up to time-discretization error; in
    particular the Hall term injects no energy, so a small residual certifies
    its energy neutrality along with the overall ledger.
    """
    if next.t <= prev.t:
        raise ValueError(f"records must be consecutive in time, got {prev.t} -> {next.t}")
    return float((next.energy - prev.energy) + dissipation_integral)


def shell_multiplier_norm(U: SpectralVectorField, s: float) -> float:
    """H^s norm of (I - lap - 2 sqrt(-lap)) U, i.e. the (1-|xi|)^2 multiplier.

    For fields supported on the shell 1-eps <= |xi| <= 1+eps this is bounded
    by eps^2 times the H^s norm of U, coefficient by coefficient.
    """
    m = (1.0 - U.grid.k_mag) ** 2
    return sobolev_norm(SpectralVectorField(U.grid, m * U.coeffs), s)


def decay_fit(series: Iterable[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares exponential decay rate of a (t, norm) series.

    Fits log(norm) = a - rate * t and returns (rate, r_squared). Requires at
    least three samples with strictly positive norms.
    """
    pts = list(series)
    if len(pts) < 3:
        raise ValueError(f"decay fit needs at least 3 samples, got {len(pts)}")
    t = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.any(y <= 0):
        raise ValueError("decay fit requires strictly positive norms")
    logy = np.log(y)
    slope, intercept = np.polyfit(t, logy, 1)
    fitted = intercept + slope * t
    ss_res = float(np.sum((logy - fitted) ** 2))
    ss_tot = float(np.sum((logy - np.mean(logy)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(-slope), float(r2)


def bootstrap_monitor(
    records: Sequence[DiagnosticsRecord], eta: float
) -> tuple[float, Optional[float]]:
    """Running supremum of the bootstrap quantity and its first eta-crossing.

    Returns (sup value, time of first record exceeding eta, or None). This is
    the discrete analogue of the continuation criterion: global existence at
    threshold eta corresponds to exceeded_at = None.
    """
    if not records:
        raise ValueError("bootstrap monitor needs at least one record")
    sup = 0.0
    exceeded_at: Optional[float] = None
    for rec in records:
        sup = max(sup, rec.bootstrap_quantity)
        if exceeded_at is None and rec.bootstrap_quantity > eta:
            exceeded_at = rec.t
    return sup, exceeded_at


def compute_record(
    state: SimState,
    data: InitialDataSet,
    cumulative_dissipation: float,
    prev: Optional[DiagnosticsRecord] = None,
    sobolev_index: float = 3.0,
    strict_linf: bool = False,
) -> DiagnosticsRecord:
    """Assemble the full diagnostics record for one snapshot."""
    l2_u, _, linf_u = lebesgue_norms(state.u_hat, oversample=2 if strict_linf else 1)
    l2_b, _, linf_b = lebesgue_norms(state.b_hat, oversample=2 if strict_linf else 1)
    v, c = perturbation(state, data)
    h3_v = sobolev_norm(v, sobolev_index)
    h3_c = sobolev_norm(c, sobolev_index)
    div_u, div_b, omega, beltrami = defect_suite(state, data)
    U, _ = heat_reference(data, state.t)
    shell = shell_multiplier_norm(U, sobolev_index)

    # heat-reference decay must stay inside the shell's rate bracket
    eps = data.epsilon
    ratio = l2_norm(U) / l2_norm(data.U0)
    lo = np.exp(-((1.0 + eps) ** 2) * state.t) * (1.0 - 1e-9)
    hi = np.exp(-((1.0 - eps) ** 2) * state.t) * (1.0 + 1e-9)
    envelope_ok = bool(lo <= ratio <= hi)

    rec = DiagnosticsRecord(
        t=state.t,
        l2_u=l2_u,
        l2_b=l2_b,
        linf_u=linf_u,
        linf_b=linf_b,
        h3_v=h3_v,
        h3_c=h3_c,
        bootstrap_quantity=h3_v ** 2 + h3_c ** 2,
        div_defect_u=div_u,
        div_defect_b=div_b,
        omega_defect=omega,
        beltrami_defect_U=beltrami,
        energy_residual=0.0,
        shell_multiplier_norm=shell,
        cumulative_dissipation=cumulative_dissipation,
    )
    if prev is not None:
        rec.energy_residual = energy_budget(
            prev, rec, cumulative_dissipation - prev.cumulative_dissipation
        )
    rec.decay_envelope_ok = envelope_ok and rec.is_finite
    return rec
