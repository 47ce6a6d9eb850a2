"""Scaled anisotropic Navier-Stokes on the strip: IMEX stepping and runs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .errors import BoundaryError, CompatibilityError, InstabilityError, ValidationError
from .grid import (
    Grid,
    SpectralField,
    _ddx_multiplier,
    box_divergence,
    ddy_array,
    dy_energy,
    mode_energy,
    to_physical,
    to_spectral,
    trapz_y,
    vertical_velocity_from_u,
)
from .subspace import SubspaceStepper, project_to_subspace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ANSConfig:
    grid: Grid
    dt: float
    t_end: float
    eps: float
    divergence_tol: float = 1e-8
    dealias: bool = True
    nonlinear: bool = True  # test hook: False gives the Stokes problem

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValidationError(f"t_end must be >= 0, got {self.t_end}")
        if not 0 < self.eps <= 1:
            raise ValidationError(f"eps must lie in (0, 1], got {self.eps}")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class ANSState:
    u: SpectralField
    v: SpectralField
    p: SpectralField
    t: float
    eps: float
    prev_nonlinear: tuple | None = field(default=None, repr=False)
    step_index: int = 0


def check_boundary(u: SpectralField, tol: float = 1e-8) -> None:
    wall = float(np.max(np.abs(u.coeffs[:, [0, -1]]), initial=0.0))
    if wall > tol:
        raise BoundaryError(f"u is not zero on the walls (max {wall:.3e})")


def check_compatibility(u: SpectralField, tol: float = 1e-8) -> float:
    """Return max_k |k * trapz_y u(k)|; raise if above ``tol``."""
    mean = trapz_y(u.coeffs, u.grid.dy)
    resid = float(np.max(np.abs(u.grid.kx * mean), initial=0.0))
    if resid > tol:
        raise CompatibilityError(f"d/dx int_0^1 u dy = {resid:.3e} exceeds {tol:g}")
    return resid


def initial_data_scaled(u0: SpectralField, eps: float, tol: float = 1e-8) -> ANSState:
    check_boundary(u0, tol)
    check_compatibility(u0, tol)
    # cleanup: remove round-off level wall/mean residue so the box divergence is exact
    u = u0.with_coeffs(project_to_subspace(u0.coeffs, u0.grid))
    v = vertical_velocity_from_u(u, tol)
    return ANSState(u, v, SpectralField.zeros(u0.grid), 0.0, eps)


def advective_tendency(u: np.ndarray, v: np.ndarray, q: np.ndarray, grid: Grid, dealias=True):
    """-(u d_x q + v d_y q) formed in physical space, 2/3-truncated."""
    mx = _ddx_multiplier(grid)[:, None]
    prod = to_physical(u) * to_physical(mx * q) + to_physical(v) * to_physical(
        ddy_array(q, grid.dy, 1)
    )
    out = -to_spectral(prod)
    if dealias:
        out *= grid.dealias_mask[:, None]
    return out


def nonlinear_tendency_ans(state: ANSState, dealias: bool = True):
    """Return (Nu, Nv) = (-(u u_x + v u_y), -(u v_x + v v_y)) as SpectralFields."""
    g = state.u.grid
    u, v = state.u.coeffs, state.v.coeffs
    nu = advective_tendency(u, v, u, g, dealias)
    nv = advective_tendency(u, v, v, g, dealias)
    return state.u.with_coeffs(nu), state.v.with_coeffs(nv)


def pressure_solve_ans(rhs_u: SpectralField, rhs_v: SpectralField, eps: float, dt: float) -> SpectralField:
    """Per-mode Neumann solve of (-k^2 + eps^-2 d_yy) q = (ik u* + d_y v*) / dt.

    Tridiagonal with ghost-point Neumann rows; the k = 0 system is gauged to
    zero trapezoid mean.
    """
    if not eps > 0:
        raise ValidationError("eps must be positive")
    g = rhs_u.grid
    dy = g.dy
    ny = g.ny
    mx = _ddx_multiplier(g)[:, None]
    rhs = (mx * rhs_u.coeffs + ddy_array(rhs_v.coeffs, dy, 1)) / dt
    c = 1.0 / (eps**2 * dy**2)
    q = np.zeros_like(rhs)
    for i, kx in enumerate(g.kx):
        ab = np.zeros((3, ny))
        ab[1, :] = -kx**2 - 2 * c
        ab[0, 1:] = c
        ab[2, :-1] = c
        ab[0, 1] = 2 * c  # ghost point at y = 0
        ab[2, -2] = 2 * c  # ghost point at y = 1
        b = rhs[i].copy()
        if g.k_int[i] == 0:
            ab[1, 0], ab[0, 1] = 1.0, 0.0
            b[0] = 0.0
            sol = solve_banded((1, 1), ab, b)
            sol -= trapz_y(sol, dy)
        else:
            sol = solve_banded((1, 1), ab, b)
        q[i] = sol
    return rhs_u.with_coeffs(q)


class _Stepper:
    """Caches the per-mode matrices for one (grid, eps, dt)."""

    _cache: dict = {}

    @classmethod
    def get(cls, grid: Grid, eps: float, dt: float) -> SubspaceStepper:
        key = (grid, float(eps), float(dt))
        if key not in cls._cache:
            if len(cls._cache) > 16:
                cls._cache.clear()
            cls._cache[key] = SubspaceStepper.build(grid, eps, dt)
        return cls._cache[key]


def step_ans(state: ANSState, cfg: ANSConfig) -> ANSState:
    """One CN/AB2 step (Euler for the explicit part on the first step)."""
    g = cfg.grid
    st = _Stepper.get(g, cfg.eps, cfg.dt)
    u, v = state.u.coeffs, state.v.coeffs
    if cfg.nonlinear:
        nu = advective_tendency(u, v, u, g, cfg.dealias)
        nv = advective_tendency(u, v, v, g, cfg.dealias)
    else:
        nu = np.zeros_like(u)
        nv = np.zeros_like(v)
    if state.prev_nonlinear is None:
        fu, fv = nu, nv
    else:
        pu, pv = state.prev_nonlinear
        fu, fv = 1.5 * nu - 0.5 * pu, 1.5 * nv - 0.5 * pv
    u_new = st.step(u, fu, fv)
    if not np.all(np.isfinite(u_new)):
        raise InstabilityError(
            f"non-finite velocity at t={state.t + cfg.dt:g}; CFL number {cfl_number(state, cfg.dt):.3g}"
        )
    v_new = st.vertical(u_new)
    p_new = st.pressure(u, u_new, fu)
    out = ANSState(
        state.u.with_coeffs(u_new),
        state.v.with_coeffs(v_new),
        state.u.with_coeffs(p_new),
        state.t + cfg.dt,
        cfg.eps,
        (nu, nv),
        state.step_index + 1,
    )
    div = float(np.sqrt(np.mean(np.abs(box_divergence(out.u, out.v)) ** 2)))
    if div > cfg.divergence_tol:
        raise InstabilityError(f"divergence {div:.3e} exceeds tolerance {cfg.divergence_tol:g}")
    return out


def cfl_number(state, dt: float) -> float:
    g = state.u.grid
    umax = np.abs(to_physical(state.u.coeffs)).max()
    vmax = np.abs(to_physical(state.v.coeffs)).max() if hasattr(state, "v") else 0.0
    return float(dt * (umax * np.abs(g.kx).max() + vmax / g.dy))


def energy(u: SpectralField, v: SpectralField | None = None, eps: float = 0.0) -> float:
    """1/2 ||(u, eps v)||^2."""
    dy = u.grid.dy
    e = mode_energy(u.coeffs, dy).sum()
    if v is not None:
        e += eps**2 * mode_energy(v.coeffs, dy).sum()
    return 0.5 * float(e)


def dissipation(u: SpectralField, v: SpectralField | None = None, eps: float = 0.0) -> float:
    """eps^2 ||d_x (u, eps v)||^2 + ||d_y (u, eps v)||^2 with the SBP y-gradient."""
    g = u.grid
    k2 = g.kx**2

    def one(c, w):
        return w * (eps**2 * (k2 * mode_energy(c, g.dy)).sum() + dy_energy(c, g.dy).sum())

    d = one(u.coeffs, 1.0)
    if v is not None:
        d += one(v.coeffs, eps**2)
    return float(d)


def energy_residual(prev: ANSState, new: ANSState, dt: float) -> float:
    """1/2 delta ||(u, eps v)||^2 + dt * (trapezoid average of the dissipation)."""
    e = prev.eps
    de = energy(new.u, new.v, e) - energy(prev.u, prev.v, e)
    d = 0.5 * (dissipation(prev.u, prev.v, e) + dissipation(new.u, new.v, e))
    return de + dt * d


@dataclass
class RunSummary:
    state: object
    series: dict
    steps: int
    extras: dict = field(default_factory=dict)


def run_ans(cfg: ANSConfig, u0: SpectralField, observers=(), cadence: int = 1) -> RunSummary:
    """Integrate from 0 to t_end, calling each observer (state) every ``cadence`` steps.

    Observers are called on the initial state too. An observer may expose
    ``series`` (a dict of NormSeries) which is merged into the summary.
    """
    state = initial_data_scaled(u0, cfg.eps)
    cfl = cfl_number(state, cfg.dt)
    if cfl > 1.0:
        log.warning("advective CFL number %.3g exceeds 1 at t=0", cfl)
    for obs in observers:
        obs(state)
    n = cfg.nsteps
    for i in range(n):
        state = step_ans(state, cfg)
        if (i + 1) % cadence == 0 or i + 1 == n:
            for obs in observers:
                obs(state)
    series = {}
    for obs in observers:
        series.update(getattr(obs, "series", {}))
    return RunSummary(state, series, n)


def with_time(state, t):
    return replace(state, t=t)
