"""Pseudo-spectral solver and verification harness for 3D incompressible
Hall-MHD on a periodic box, with annulus-supported Beltrami initial data."""

from .config import ConfigError, RunConfig, parse_config
from .diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    bootstrap_monitor,
    compute_record,
    decay_fit,
    defect_suite,
    energy_budget,
    lebesgue_norms,
    shell_multiplier_norm,
    sobolev_norm,
)
from .dynamics import (
    BlowUpError,
    SimState,
    Stepper,
    Tendency,
    evolve,
    forcing_terms,
    forcing_terms_definitional,
    heat_reference,
    perturbation,
    rhs,
    stability_bounds,
    step,
)
from .harness import (
    ExperimentReport,
    SweepReport,
    emit,
    emit_sweep,
    epsilon_sweep,
    run_single,
)
from .initial_data import (
    EPSILON_MAX,
    BumpProfile,
    GridResolutionError,
    InitialDataSet,
    build_bump,
    build_U0,
    fourier_l1_norm,
    smallness_lhs,
)
from .spectral import (
    Grid,
    SingularSymbolError,
    SpectralVectorField,
    apply_multiplier,
    curl,
    dealias,
    divergence,
    enable_debug_checks,
    forward_transform,
    gradient,
    heat_semigroup,
    inverse_transform,
    l2_inner,
    l2_norm,
    lambda_power,
    leray_project,
    pointwise_product,
    transform,
    zygmund,
)

__version__ = "0.1.0"
