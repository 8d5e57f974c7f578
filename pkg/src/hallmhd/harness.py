"""Experiment orchestration: single runs, epsilon sweeps, file emission.

The whole pipeline is RNG-free, so identical configurations produce
byte-identical output files on a given platform.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .config import RunConfig
from .diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    bootstrap_monitor,
    compute_record,
    decay_fit,
)
from .dynamics import BlowUpError, SimState, evolve, stability_bounds
from .initial_data import (
    InitialDataSet,
    build_bump,
    build_U0,
    fourier_l1_norm,
    smallness_lhs,
)
from .diagnostics import sobolev_norm
from .spectral import l2_norm

__all__ = ["ExperimentReport", "SweepReport", "run_single", "epsilon_sweep", "emit", "emit_sweep"]

SCHEMA_VERSION = 1


@dataclass
class ExperimentReport:
    config: RunConfig
    initial_norms: dict[str, float]
    smallness: float
    records: list[DiagnosticsRecord]
    decay: dict[str, float]
    eta_used: float
    bootstrap_sup: float
    bootstrap_sup_time: float
    bootstrap_exceeded_at: Optional[float]
    stability: dict[str, float]
    verdicts: dict[str, dict[str, Any]]
    blowup: Optional[dict[str, float]]
    runtime_seconds: float
    delta: Optional[float] = None

    @property
    def completed(self) -> bool:
        return self.blowup is None


def _verdict(ok: bool, value: float, threshold: float, cmp: str = "<=") -> dict[str, Any]:
    return {"ok": bool(ok), "value": float(value), "threshold": float(threshold), "cmp": cmp}


def _heat_decay_series(data: InitialDataSet, horizon: float = 3.0, samples: int = 31):
    """Analytic (t, ||heat(t) U0||_L2) series for the decay-rate fit."""
    from .spectral import heat_semigroup

    ts = np.linspace(0.0, horizon, samples)
    return [(float(t), l2_norm(heat_semigroup(data.U0, float(t)))) for t in ts]


def build_initial_state(data: InitialDataSet) -> SimState:
    return SimState(0.0, data.u0.copy(), data.b0.copy())


def run_single(config: RunConfig, delta: Optional[float] = None) -> ExperimentReport:
    """Build the initial data, evolve it, and assemble the full report.

    A blow-up does not raise: the report carries the truncated series, the
    blow-up location, and failed verdicts.
    """
    config.validate()
    wall_start = time.perf_counter()

    grid = config.grid()
    data = build_U0(grid, build_bump(config.epsilon))
    state0 = build_initial_state(data)

    init = {
        "fourier_l1_U0": fourier_l1_norm(data.U0),
        "l2_U0": l2_norm(data.U0),
        "h3_U0": sobolev_norm(data.U0, 3.0),
        "l2_b0": l2_norm(data.b0),
        "amplitude": data.amplitude,
        "energy": 0.5 * (l2_norm(data.u0) ** 2 + l2_norm(data.b0) ** 2),
    }
    smallness = smallness_lhs(data, config.smallness_C)
    stability = stability_bounds(state0)

    records: list[DiagnosticsRecord] = []

    def observer(state: SimState, cum_dissipation: float) -> None:
        prev = records[-1] if records else None
        records.append(
            compute_record(
                state,
                data,
                cum_dissipation,
                prev=prev,
                strict_linf=config.strict_linf,
            )
        )

    blowup = None
    try:
        evolve(state0, config, observer)
    except BlowUpError as exc:
        blowup = {"t": exc.t, "norm": exc.norm_name, "value": exc.value}

    # Heat-reference decay fit on an analytic series (run-independent).
    heat_series = _heat_decay_series(data)
    rate_U, r2_U = decay_fit(heat_series)
    decay = {
        "heat_rate": rate_U,
        "heat_r_squared": r2_U,
        "bracket_low": (1.0 - config.epsilon) ** 2,
        "bracket_high": (1.0 + config.epsilon) ** 2,
    }
    for name, key in (("u", "l2_u"), ("b", "l2_b")):
        series = [(r.t, getattr(r, key)) for r in records if getattr(r, key) > 0]
        if len(series) >= 3:
            rate, r2 = decay_fit(series)
            decay[f"measured_rate_{name}"] = rate
            decay[f"measured_r_squared_{name}"] = r2

    sup, sup_time = 0.0, 0.0
    for rec in records:
        if rec.bootstrap_quantity > sup:
            sup, sup_time = rec.bootstrap_quantity, rec.t
    eta_used = 2.0 * sup if config.eta == "auto" else float(config.eta)
    _, exceeded_at = bootstrap_monitor(records, eta_used) if records else (0.0, None)

    energy0 = init["energy"]
    verdicts: dict[str, dict[str, Any]] = {}
    if records:
        r0 = records[0]
        verdicts["beltrami_initial"] = _verdict(r0.beltrami_defect_U <= 1e-12, r0.beltrami_defect_U, 1e-12)
        div0 = max(r0.div_defect_u, r0.div_defect_b)
        verdicts["div_initial"] = _verdict(div0 <= 1e-12, div0, 1e-12)
        shell_ratio = r0.shell_multiplier_norm / max(init["h3_U0"], 1e-300)
        shell_cap = config.epsilon ** 2 * (1.0 + 1e-12)
        verdicts["shell_multiplier"] = _verdict(shell_ratio <= shell_cap, shell_ratio, shell_cap)
        omega_rel = max(
            (r.omega_defect / r.l2_b if r.l2_b > 0 else 0.0) for r in records
        )
        verdicts["omega_persistence"] = _verdict(omega_rel <= 1e-8, omega_rel, 1e-8)
        div_run = max(max(r.div_defect_u, r.div_defect_b) for r in records)
        verdicts["div_free_run"] = _verdict(div_run <= 1e-10, div_run, 1e-10)
        if len(records) >= 2 and energy0 > 0:
            resid_rate = max(
                abs(b.energy_residual) / (b.t - a.t)
                for a, b in zip(records, records[1:])
            ) / energy0
            energy_cap = 1e-6 if config.dt >= 1e-3 else 1e-7
            verdicts["energy_ledger"] = _verdict(resid_rate <= energy_cap, resid_rate, energy_cap)
    rate_ok = (
        decay["bracket_low"] * 0.99 <= rate_U <= decay["bracket_high"] * 1.01
        and r2_U >= 0.999
        and rate_U >= 0.5
    )
    verdicts["heat_decay_bracket"] = _verdict(rate_ok, rate_U, decay["bracket_high"])
    verdicts["bootstrap_contained"] = _verdict(exceeded_at is None, sup, eta_used)
    verdicts["no_blowup"] = _verdict(blowup is None, 0.0 if blowup is None else blowup["t"], config.t_end, cmp="completed")
    if delta is not None:
        verdicts["smallness_vs_delta"] = _verdict(smallness <= delta, smallness, delta)

    return ExperimentReport(
        config=config,
        initial_norms=init,
        smallness=smallness,
        records=records,
        decay=decay,
        eta_used=eta_used,
        bootstrap_sup=sup,
        bootstrap_sup_time=sup_time,
        bootstrap_exceeded_at=exceeded_at,
        stability=stability,
        verdicts=verdicts,
        blowup=blowup,
        runtime_seconds=time.perf_counter() - wall_start,
        delta=delta,
    )


# ---------------------------------------------------------------------------
# Epsilon sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepReport:
    base_config: RunConfig
    rows: list[dict[str, float]]
    slope: Optional[float]
    slope_r_squared: Optional[float]
    degenerate_fit: bool
    l1_scaling: list[dict[str, float]]
    evolved: dict[float, ExperimentReport] = field(default_factory=dict)
    runtime_seconds: float = 0.0


def epsilon_sweep(
    epsilons: Sequence[float],
    base: RunConfig,
    evolve_runs: bool = False,
) -> SweepReport:
    """Initial-norm table over a family of shell widths, plus a power-law fit.

    The norm table is cheap (construction only); full dynamics run only when
    ``evolve_runs`` is set. The fit regresses log(smallness) on log(epsilon);
    a single-point sweep is flagged degenerate and skips the fit.
    """
    if not epsilons:
        raise ValueError("sweep needs at least one epsilon")
    wall_start = time.perf_counter()
    rows = []
    evolved: dict[float, ExperimentReport] = {}
    for eps in epsilons:
        cfg = dataclasses.replace(base, epsilon=float(eps)).validate()
        grid = cfg.grid()
        data = build_U0(grid, build_bump(cfg.epsilon))
        rows.append(
            {
                "epsilon": float(eps),
                "fourier_l1_U0": fourier_l1_norm(data.U0),
                "l2_U0": l2_norm(data.U0),
                "h3_U0": sobolev_norm(data.U0, 3.0),
                "smallness_lhs": smallness_lhs(data, cfg.smallness_C),
                "loglog_inv_eps": math.log(math.log(1.0 / eps)),
            }
        )
        if evolve_runs:
            evolved[float(eps)] = run_single(cfg)

    degenerate = len(rows) < 2
    slope = slope_r2 = None
    if not degenerate:
        x = np.log([r["epsilon"] for r in rows])
        y = np.log([r["smallness_lhs"] for r in rows])
        coeffs = np.polyfit(x, y, 1)
        fitted = np.polyval(coeffs, x)
        ss_res = float(np.sum((y - fitted) ** 2))
        ss_tot = float(np.sum((y - np.mean(y)) ** 2))
        slope = float(coeffs[0])
        slope_r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot

    # how the L1 Fourier norm tracks the sqrt(log log 1/eps) factor
    ref = rows[-1]
    l1_scaling = []
    for r in rows:
        expected = math.sqrt(r["loglog_inv_eps"] / ref["loglog_inv_eps"])
        actual = r["fourier_l1_U0"] / ref["fourier_l1_U0"]
        l1_scaling.append(
            {
                "epsilon": r["epsilon"],
                "l1_ratio": actual,
                "sqrt_loglog_ratio": expected,
                "relative_deviation": abs(actual / expected - 1.0),
            }
        )

    return SweepReport(
        base_config=base,
        rows=rows,
        slope=slope,
        slope_r_squared=slope_r2,
        degenerate_fit=degenerate,
        l1_scaling=l1_scaling,
        evolved=evolved,
        runtime_seconds=time.perf_counter() - wall_start,
    )


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _format_float(x: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def _config_dict(config: RunConfig) -> dict:
    return dataclasses.asdict(config)


def emit(report: ExperimentReport, outdir: Path | str) -> tuple[Path, Path]:
    """Write timeseries.csv and report.json under ``outdir`` (overwriting).

    Wall-clock timings stay on the in-memory report: emitted files depend only
    on the configuration, so identical runs are byte-identical.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "timeseries.csv"
    lines = [",".join(CSV_COLUMNS)]
    for rec in report.records:
        lines.append(",".join(_format_float(v) for v in rec.csv_row()))
    csv_path.write_text("\n".join(lines) + "\n")

    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": _config_dict(report.config),
        "initial_norms": report.initial_norms,
        "smallness_lhs": report.smallness,
        "delta": report.delta,
        "delta_verdict": (
            "informational" if report.delta is None else bool(report.smallness <= report.delta)
        ),
        "decay": report.decay,
        "eta_used": report.eta_used,
        "bootstrap": {
            "sup": report.bootstrap_sup,
            "sup_time": report.bootstrap_sup_time,
            "exceeded_at": report.bootstrap_exceeded_at,
        },
        "stability": report.stability,
        "verdicts": report.verdicts,
        "blowup": report.blowup,
        "n_records": len(report.records),
    }
    json_path = outdir / "report.json"
    json_path.write_text(json.dumps(payload, indent=2) + "\n")
    return csv_path, json_path


def emit_sweep(sweep: SweepReport, outdir: Path | str) -> tuple[Path, Path]:
    """Write sweep.csv and sweep.json; evolved runs land in eps_* subdirectories."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cols = ("epsilon", "fourier_l1_U0", "l2_U0", "h3_U0", "smallness_lhs")
    lines = [",".join(cols)]
    for r in sweep.rows:
        lines.append(",".join(_format_float(r[c]) for c in cols))
    csv_path = outdir / "sweep.csv"
    csv_path.write_text("\n".join(lines) + "\n")

    payload = {
        "schema_version": SCHEMA_VERSION,
        "base_config": _config_dict(sweep.base_config),
        "rows": sweep.rows,
        "fit": {
            "slope": sweep.slope,
            "r_squared": sweep.slope_r_squared,
            "degenerate": sweep.degenerate_fit,
        },
        "l1_scaling": sweep.l1_scaling,
    }
    json_path = outdir / "sweep.json"
    json_path.write_text(json.dumps(payload, indent=2) + "\n")

    for eps, rep in sweep.evolved.items():
        emit(rep, outdir / f"eps_{eps:g}")
    return csv_path, json_path
