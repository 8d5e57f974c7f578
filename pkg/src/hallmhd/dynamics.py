"""Hall-MHD dynamics: tendency assembly, integrating-factor RK4, heat reference.

The incompressible system solved here (unit viscosity and magnetic
diffusivity):

    du/dt + u.grad u - lap u + grad p = b.grad b
    db/dt + u.grad b - lap b + curl((curl b) x b) = b.grad u
    div u = div b = 0

Pressure never materializes: the velocity tendency is assembled in rotational
form P((curl b) x b - (curl u) x u) with P the Leray projector, and the
induction tendency as an exact curl, curl((u - curl b) x b), which keeps
div b = 0 at the multiplier level. Diffusion is applied exactly through the
heat semigroup (integrating factor); only the nonlinear terms see the
Runge-Kutta stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from . import _kernels
from .initial_data import InitialDataSet
from .spectral import (
    Grid,
    SpectralVectorField,
    apply_multiplier,
    curl,
    heat_semigroup,
    inverse_transform,
    irfftn_batch,
    l2_norm,
    leray_project,
    pointwise_product,
    rfftn_batch,
)

if TYPE_CHECKING:
    from .config import RunConfig

__all__ = [
    "SimState",
    "Tendency",
    "BlowUpError",
    "Stepper",
    "rhs",
    "step",
    "evolve",
    "heat_reference",
    "perturbation",
    "forcing_terms",
    "forcing_terms_definitional",
    "stability_bounds",
]

RK_STABILITY = 2.8  # classical RK4 imaginary-axis stability extent
BLOWUP_FACTOR = 1e6


class BlowUpError(RuntimeError):
    """Raised when a monitored norm explodes or turns non-finite."""

    def __init__(self, t: float, norm_name: str, value: float, last_state: Optional["SimState"]):
        super().__init__(f"blow-up detected at t={t:.6g}: {norm_name} = {value:.6g}")
        self.t = t
        self.norm_name = norm_name
        self.value = value
        self.last_state = last_state


@dataclass
class SimState:
    """Simulation snapshot: time plus spectral velocity and magnetic fields."""

    t: float
    u_hat: SpectralVectorField
    b_hat: SpectralVectorField

    @property
    def grid(self) -> Grid:
        return self.u_hat.grid

    def copy(self) -> "SimState":
        return SimState(self.t, self.u_hat.copy(), self.b_hat.copy())


@dataclass
class Tendency:
    """Non-diffusive tendencies (diffusion is handled by the integrating factor)."""

    du_hat: SpectralVectorField
    db_hat: SpectralVectorField


def rhs(state: SimState, hall_enabled: bool = True) -> Tendency:
    """Nonlinear tendency, assembled from the public spectral operators.

    This is the readable reference path; ``Stepper`` fuses the same arithmetic
    for the time loop and is tested against this function.
    """
    u, b = state.u_hat, state.b_hat
    w = curl(u)
    j = curl(b)
    jxb = pointwise_product(j, b, "cross")
    wxu = pointwise_product(w, u, "cross")
    uxb = pointwise_product(u, b, "cross")
    du = leray_project(jxb - wxu)
    db = curl(uxb - jxb) if hall_enabled else curl(uxb)
    return Tendency(du_hat=du, db_hat=db)


class Stepper:
    """Integrating-factor RK4 stepper with preallocated fused work buffers.

    One instance is bound to (grid, dt, hall flag); ``evolve`` drives it over
    many steps, and the module-level ``step`` keeps a small cache of instances
    for one-off use.
    """

    def __init__(self, grid: Grid, dt: float, hall_enabled: bool = True):
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.grid = grid
        self.dt = dt
        self.hall = 1.0 if hall_enabled else 0.0
        n, nz = grid.n, grid.nz
        self.e_half = np.exp(-grid.k_sq * (dt / 2.0))
        self._scale_fwd = 1.0 / grid.n ** 3
        self._scale_inv = float(grid.n ** 3)
        self._weight_z = grid.hermitian_weight[0, 0].copy()
        self._batch = np.empty((12, n, n, nz), dtype=np.complex128)
        self._phys = np.empty((12, n, n, n), dtype=np.float64)
        self._prod = np.empty((6, n, n, n), dtype=np.float64)
        self._k = [np.empty((6, n, n, nz), dtype=np.complex128) for _ in range(4)]
        self._stage = np.empty((6, n, n, nz), dtype=np.complex128)

    # -- packing ----------------------------------------------------------

    def pack(self, state: SimState) -> np.ndarray:
        return np.concatenate([state.u_hat.coeffs, state.b_hat.coeffs])

    def unpack(self, t: float, packed: np.ndarray) -> SimState:
        return SimState(
            t,
            SpectralVectorField(self.grid, packed[0:3].copy()),
            SpectralVectorField(self.grid, packed[3:6].copy()),
        )

    # -- core -------------------------------------------------------------

    def tendency_packed(self, s: np.ndarray, out: np.ndarray) -> None:
        g = self.grid
        _kernels.curl_batch(s, g.k1, g.k1z, self._scale_inv, self._batch)
        irfftn_batch(self._batch, g.n, out=self._phys)
        _kernels.cross_terms(self._phys, self.hall, self._prod)
        spec = rfftn_batch(self._prod)
        _kernels.project_and_curl(spec, g.k1, g.k1z, g.dealias_cutoff, self._scale_fwd, out)

    def step_packed(self, s: np.ndarray, out: np.ndarray) -> np.ndarray:
        dt, e = self.dt, self.e_half
        k1, k2, k3, k4 = self._k
        st = self._stage
        self.tendency_packed(s, k1)
        _kernels.stage_inside(s, k1, e, 0.5 * dt, st)
        self.tendency_packed(st, k2)
        _kernels.stage_outside(s, k2, e, 0.5 * dt, st)
        self.tendency_packed(st, k3)
        _kernels.stage_final_arg(s, k3, e, dt, st)
        self.tendency_packed(st, k4)
        _kernels.rk4_combine(s, k1, k2, k3, k4, e, dt, out)
        return out

    def norms_packed(self, s: np.ndarray) -> tuple[float, float, float]:
        """(||u||_L2^2, ||b||_L2^2, dissipation rate) of a packed state."""
        g = self.grid
        return _kernels.energy_dissipation(s, g.k1, g.k1z, self._weight_z, g.volume)

    def step(self, state: SimState) -> SimState:
        """Advance one dt; raises BlowUpError on non-finite output."""
        out = self.step_packed(self.pack(state), np.empty_like(self._stage))
        t_new = state.t + self.dt
        eu, eb, _ = self.norms_packed(out)
        if not (np.isfinite(eu) and np.isfinite(eb)):
            name = "l2_u" if not np.isfinite(eu) else "l2_b"
            raise BlowUpError(t_new, name, float("nan"), state.copy())
        return self.unpack(t_new, out)


_STEPPER_CACHE: dict[tuple, Stepper] = {}


def _get_stepper(grid: Grid, dt: float, hall_enabled: bool) -> Stepper:
    key = (grid.n, grid.box_length, dt, hall_enabled)
    stepper = _STEPPER_CACHE.get(key)
    if stepper is None:
        if len(_STEPPER_CACHE) >= 4:
            _STEPPER_CACHE.pop(next(iter(_STEPPER_CACHE)))
        stepper = Stepper(grid, dt, hall_enabled)
        _STEPPER_CACHE[key] = stepper
    return stepper


def step(state: SimState, dt: float, hall_enabled: bool = True) -> SimState:
    """One integrating-factor RK4 step of length dt."""
    return _get_stepper(state.grid, dt, hall_enabled).step(state)


Observer = Callable[[SimState, float], None]


def evolve(state: SimState, config: "RunConfig", observer: Optional[Observer] = None) -> SimState:
    """March the state to config.t_end, reporting snapshots to ``observer``.

    The observer is called with (snapshot, cumulative dissipation integral) at
    t = 0, every ``output_cadence`` steps, and at the final time (without
    duplication). Snapshots are independent copies. The dissipation integral
    of ||grad u||^2 + ||grad b||^2 is accumulated at step resolution with
    composite Simpson panels (trapezoid closes an odd tail), accurate enough
    that the energy-ledger residual reflects the time integrator, not the
    quadrature.

    Raises BlowUpError (carrying the last valid snapshot) if a monitored norm
    exceeds 1e6 times its initial value or turns non-finite.
    """
    if config.t_end < 0:
        raise ValueError("t_end must be nonnegative")
    stepper = _get_stepper(state.grid, config.dt, config.hall_enabled)
    cadence = max(int(config.output_cadence), 1)

    n_steps = int(np.floor(config.t_end / config.dt + 1e-9))
    tail = config.t_end - n_steps * config.dt
    if tail < 1e-9 * config.dt:
        tail = 0.0

    s = stepper.pack(state)
    eu0, eb0, d_prev = stepper.norms_packed(s)
    ref = np.sqrt(max(eu0 + eb0, 0.0))
    ref_u = max(np.sqrt(eu0), 1e-3 * ref, 1e-30)
    ref_b = max(np.sqrt(eb0), 1e-3 * ref, 1e-30)

    cum = 0.0  # Simpson value at the last even step
    d_even, d_mid = d_prev, 0.0
    t0 = state.t

    def current_cum(step_idx: int) -> float:
        if step_idx % 2 == 1:  # dangling panel: close with trapezoid
            return cum + 0.5 * config.dt * (d_even + d_mid)
        return cum

    if observer is not None:
        observer(state.copy(), 0.0)

    last_valid = state.copy()
    buf = np.empty_like(s)
    for i in range(1, n_steps + 1):
        s, buf = stepper.step_packed(s, buf), s
        t = t0 + i * config.dt
        eu, eb, d = stepper.norms_packed(s)
        if not (np.isfinite(eu) and np.isfinite(eb)):
            bad = "l2_u" if not np.isfinite(eu) else "l2_b"
            raise BlowUpError(t, bad, float("nan"), last_valid)
        if np.sqrt(eu) > BLOWUP_FACTOR * ref_u or np.sqrt(eb) > BLOWUP_FACTOR * ref_b:
            bad, val = ("l2_u", np.sqrt(eu)) if np.sqrt(eu) > BLOWUP_FACTOR * ref_u else ("l2_b", np.sqrt(eb))
            raise BlowUpError(t, bad, float(val), last_valid)
        if i % 2 == 1:
            d_mid = d
        else:
            cum += (config.dt / 3.0) * (d_even + 4.0 * d_mid + d)
            d_even = d
        is_record = (i % cadence == 0) or (i == n_steps and tail == 0.0)
        if is_record:
            last_valid = stepper.unpack(t, s)
            if observer is not None:
                observer(last_valid.copy(), current_cum(i))

    final = stepper.unpack(t0 + n_steps * config.dt, s)
    if tail > 0.0:
        tail_stepper = Stepper(state.grid, tail, config.hall_enabled)
        pre = tail_stepper.norms_packed(s)[2]
        s = tail_stepper.step_packed(s, np.empty_like(s))
        post = tail_stepper.norms_packed(s)[2]
        final = tail_stepper.unpack(t0 + config.t_end, s)
        if observer is not None:
            observer(final.copy(), current_cum(n_steps) + 0.5 * tail * (pre + post))
    return final


# ---------------------------------------------------------------------------
# Heat reference flow and perturbation
# ---------------------------------------------------------------------------


def heat_reference(data: InitialDataSet, t: float) -> tuple[SpectralVectorField, SpectralVectorField]:
    """Reference pair (U, B) = (heat(t) U0, -curl heat(t) U0)."""
    U = heat_semigroup(data.U0, t)
    return U, -curl(U)


def perturbation(state: SimState, data: InitialDataSet) -> tuple[SpectralVectorField, SpectralVectorField]:
    """Deviation (v, c) = (u - U(t), b - B(t)) from the heat reference."""
    U, B = heat_reference(data, state.t)
    return state.u_hat - U, state.b_hat - B


# ---------------------------------------------------------------------------
# Forcing terms of the perturbation system
# ---------------------------------------------------------------------------


def _shell_weighted(U: SpectralVectorField) -> SpectralVectorField:
    """(1 - |xi|)^2 U, the shell-smallness multiplier (= (I - lap - 2 sqrt(-lap)) U)."""
    m = (1.0 - U.grid.k_mag) ** 2
    return apply_multiplier(U, m)


def forcing_terms(data: InitialDataSet, t: float) -> tuple[SpectralVectorField, SpectralVectorField]:
    """Reduced-form forcing of the perturbation system at time t.

    f = (lap - I + 2 sqrt(-lap)) U x B   (drives the velocity perturbation)
    g = curl((I - lap - 2 sqrt(-lap)) U x B)   (drives the magnetic one)

    Both collapse to a single shell-weighted cross product: with
    S = ((1-|xi|)^2 U) x B, f = -S and g = curl S. The multiplier vanishes
    on the unit sphere and is bounded by eps^2 on the support shell, which is
    what makes the forcing small for thin shells.
    """
    if t < 0:
        raise ValueError("forcing time must be nonnegative")
    U, B = heat_reference(data, t)
    S = pointwise_product(_shell_weighted(U), B, "cross")
    return -S, curl(S)


def forcing_terms_definitional(data: InitialDataSet, t: float) -> tuple[SpectralVectorField, SpectralVectorField]:
    """Forcing terms from their defining advective expressions.

    f = P(B.grad B - U.grad U)  (the pressure-like gradient removed by Leray)
    g = B.grad U - U.grad B - curl((curl B) x B)

    Used as the independent cross-check of the reduced forms.
    """
    U, B = heat_reference(data, t)
    f = leray_project(
        pointwise_product(B, B, "advection") - pointwise_product(U, U, "advection")
    )
    g = (
        pointwise_product(B, U, "advection")
        - pointwise_product(U, B, "advection")
        - curl(pointwise_product(curl(B), B, "cross"))
    )
    return f, g


# ---------------------------------------------------------------------------
# Stability advisory
# ---------------------------------------------------------------------------


def stability_bounds(state: SimState) -> dict:
    """Engineering time-step bounds: advective CFL and a Hall (whistler) bound.

    The Hall term behaves like a b-dependent second-derivative dispersion, so
    its rate scales with |b| k_max^2 against the advective |u| k_max.
    """
    g = state.grid
    u_phys = inverse_transform(state.u_hat)
    b_phys = inverse_transform(state.b_hat)
    u_max = float(np.max(np.sqrt(np.sum(u_phys ** 2, axis=0))))
    b_max = float(np.max(np.sqrt(np.sum(b_phys ** 2, axis=0))))
    k_max = g.dealias_cutoff * np.sqrt(3.0)
    dt_adv = RK_STABILITY / (u_max * k_max) if u_max > 0 else np.inf
    dt_hall = RK_STABILITY / (b_max * k_max ** 2) if b_max > 0 else np.inf
    return {"dt_advective": dt_adv, "dt_hall": dt_hall, "u_max": u_max, "b_max": b_max}
