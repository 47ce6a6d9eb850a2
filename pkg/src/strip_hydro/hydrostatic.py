"""Hydrostatic Navier-Stokes / Prandtl-type system on the strip."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .anisotropic import (
    RunSummary,
    _Stepper,
    advective_tendency,
    check_boundary,
    check_compatibility,
    cfl_number,
)
from .errors import InstabilityError, ValidationError
from .grid import Grid, SpectralField, _ddx_multiplier, ddy_array, to_physical, to_spectral, trapz_y
from .subspace import project_to_subspace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HydroConfig:
    grid: Grid
    dt: float
    t_end: float
    dealias: bool = True
    nonlinear: bool = True
    compat_tol: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValidationError(f"t_end must be >= 0, got {self.t_end}")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class HydroState:
    u: SpectralField
    p: SpectralField  # y-constant profile per mode
    t: float
    prev_nonlinear: np.ndarray | None = field(default=None, repr=False)
    step_index: int = 0
    v: SpectralField | None = None
    reprojection_residual: float = 0.0

    @property
    def eps(self):
        return 0.0


def hydro_vertical(u: SpectralField) -> SpectralField:
    g = u.grid
    st = _Stepper.get(g, 0.0, 1.0)
    return u.with_coeffs(st.vertical(u.coeffs))


def initial_hydro(u0: SpectralField, tol: float = 1e-8) -> HydroState:
    check_boundary(u0, tol)
    check_compatibility(u0, tol)
    u = u0.with_coeffs(project_to_subspace(u0.coeffs, u0.grid))
    return HydroState(u, pressure_solve_hydro(u), 0.0, v=hydro_vertical(u))


def pressure_solve_hydro(u: SpectralField, dealias: bool = True) -> SpectralField:
    """p_hat(k) = g_hat(k) / (ik) with g = u_y(1) - u_y(0) - d_x int_0^1 u^2 dy.

    Wall shear from one-sided second-order stencils, the square dealiased and
    integrated by the trapezoid rule; the k = 0 mode is gauged to zero.
    """
    g = u.grid
    c = u.coeffs
    dy = g.dy
    shear = (3 * c[:, -1] - 4 * c[:, -2] + c[:, -3]) / (2 * dy) - (
        -3 * c[:, 0] + 4 * c[:, 1] - c[:, 2]
    ) / (2 * dy)
    sq = to_spectral(to_physical(c) ** 2)
    if dealias:
        sq *= g.dealias_mask[:, None]
    mx = _ddx_multiplier(g)
    bracket = shear - mx * trapz_y(sq, dy)
    p = np.zeros(g.nx, complex)
    nz = mx != 0
    p[nz] = bracket[nz] / mx[nz]
    return u.with_coeffs(np.repeat(p[:, None], g.ny, axis=1))


def step_hydro(state: HydroState, cfg: HydroConfig) -> HydroState:
    """CN on d_yy, AB2 on advection, pressure as the compatibility multiplier."""
    g = cfg.grid
    st = _Stepper.get(g, 0.0, cfg.dt)
    u = state.u.coeffs
    v = st.vertical(u)
    nu = advective_tendency(u, v, u, g, cfg.dealias) if cfg.nonlinear else np.zeros_like(u)
    fu = nu if state.prev_nonlinear is None else 1.5 * nu - 0.5 * state.prev_nonlinear
    u_new = st.step(u, fu, None)
    if not np.all(np.isfinite(u_new)):
        raise InstabilityError(
            f"non-finite velocity at t={state.t + cfg.dt:g}; CFL number {cfl_number(state, cfg.dt):.3g}"
        )
    # the multiplier is y-constant up to round-off; store its vertical mean
    pm = st.pressure(u, u_new, fu)[:, 1:-1].mean(axis=1)
    p = np.repeat(pm[:, None], g.ny, axis=1)
    new_u = state.u.with_coeffs(u_new)
    if cfg.nonlinear:
        formula = pressure_solve_hydro(new_u, cfg.dealias).coeffs[:, 0]
        # formula uses u^{n+1}; the multiplier is centred at n+1/2, so compare to O(dt)
        resid = float(np.max(np.abs(formula - pm)))
    else:
        resid = 0.0
    return HydroState(
        new_u,
        state.u.with_coeffs(p),
        state.t + cfg.dt,
        nu,
        state.step_index + 1,
        state.u.with_coeffs(st.vertical(u_new)),
        resid,
    )


def dt_u_residual(state: HydroState, dealias: bool = True) -> SpectralField:
    """d_t u = d_yy u - u u_x - v u_y - d_x p with p from the pressure formula."""
    g = state.u.grid
    u = state.u.coeffs
    v = hydro_vertical(state.u).coeffs
    p = pressure_solve_hydro(state.u, dealias).coeffs
    r = ddy_array(u, g.dy, 2) + advective_tendency(u, v, u, g, dealias) - _ddx_multiplier(g)[:, None] * p
    r[:, 0] = 0
    r[:, -1] = 0
    return state.u.with_coeffs(r)


def dt_u_norm_monitor(history, s: float = 1.5, p=1, weights=None, dealias: bool = True) -> float:
    """Chemin-Lerner norm (time-weighted if ``weights`` is given) of the reconstructed d_t u.

    d_t u is evaluated from the equation (dt_u_residual) at every state of
    ``history``, which must contain at least the initial state and one step.
    """
    from .grid import mode_energy
    from .littlewood_paley import (
        NormSeries,
        block_norms_from_energy,
        build_partition,
        chemin_lerner,
        time_weighted_norm,
    )

    if len(history) < 2:
        raise ValidationError("need at least one completed step")
    part = build_partition(history[0].u.grid)
    series = NormSeries.for_partition(part)
    for st in history:
        r = dt_u_residual(st, dealias).coeffs
        series.append(st.t, block_norms_from_energy(part, mode_energy(r, part.grid.dy)))
    if weights is not None:
        return time_weighted_norm(series, p, s, weights)
    return chemin_lerner(series, p, s)


def run_hydro(cfg: HydroConfig, u0: SpectralField, observers=(), cadence: int = 1) -> RunSummary:
    state = initial_hydro(u0, cfg.compat_tol)
    cfl = cfl_number(state, cfg.dt)
    if cfl > 1.0:
        log.warning("advective CFL number %.3g exceeds 1 at t=0", cfl)
    for obs in observers:
        obs(state)
    n = cfg.nsteps
    for i in range(n):
        state = step_hydro(state, cfg)
        if (i + 1) % cadence == 0 or i + 1 == n:
            for obs in observers:
                obs(state)
    series = {}
    for obs in observers:
        series.update(getattr(obs, "series", {}))
    return RunSummary(state, series, n)
