"""
Analyticity-band bookkeeping: the radius ODEs for eta, theta, zeta and the
phase weights built from them.

Bands:  Psi -> a - lambda*eta,  Phi -> a - lambda*theta,  Theta -> a - mu*zeta.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BandExhausted, ValidationError
from .grid import SpectralField, _ddx_multiplier, ddy_array, mode_energy
from .littlewood_paley import (
    DyadicPartition,
    NormSeries,
    analytic_multiplier,
    besov_from_blocks,
    block_norms_from_energy,
    build_partition,
    chemin_lerner,
)


@dataclass(frozen=True)
class RadiusState:
    a: float
    lam: float = 4.0
    mu: float = 16.0
    eta: float = 0.0
    theta: float = 0.0
    zeta: float = 0.0
    kappa: float = np.pi**2 / 2
    prev_rates: tuple | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError(f"a must be positive, got {self.a}")
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if self.mu < self.lam:
            raise ValidationError(f"mu ({self.mu}) must be >= lambda ({self.lam})")

    @property
    def radius_psi(self) -> float:
        return self.a - self.lam * self.eta

    @property
    def radius_phi(self) -> float:
        return self.a - self.lam * self.theta

    @property
    def radius_theta(self) -> float:
        return self.a - self.mu * self.zeta

    @property
    def threshold(self) -> float:
        """a / lambda: eta or theta reaching it exhausts the band."""
        return self.a / self.lam

    @property
    def alive(self) -> bool:
        return (
            self.eta < self.a / self.lam
            and self.theta < self.a / self.lam
            and self.mu * self.zeta < self.a
        )

    def primed(self, rates) -> "RadiusState":
        """Store the t = 0 rate sample so every advance is a trapezoid step."""
        return replace(self, prev_rates=tuple(float(r) for r in rates))


def _weighted_besov(p: DyadicPartition, c: np.ndarray, radius: float, s: float = 0.5) -> float:
    w = analytic_multiplier(p.grid, radius)
    e = mode_energy(c, p.grid.dy) * w**2
    return besov_from_blocks(p, block_norms_from_energy(p, e), s)


def eta_rate(ans_state, rs: RadiusState, p: DyadicPartition | None = None) -> float:
    """eps ||d_x u_Psi||_{B^1/2} + ||d_y u_Psi||_{B^1/2}."""
    if rs.eta >= rs.threshold:
        raise BandExhausted(f"eta = {rs.eta:g} reached a/lambda = {rs.threshold:g}")
    u = ans_state.u
    p = p or build_partition(u.grid)
    r = rs.radius_psi
    mx = _ddx_multiplier(u.grid)[:, None]
    dx = _weighted_besov(p, mx * u.coeffs, r)
    dy = _weighted_besov(p, ddy_array(u.coeffs, u.grid.dy, 1), r)
    return ans_state.eps * dx + dy


def theta_rate(hydro_state, rs: RadiusState, p: DyadicPartition | None = None) -> float:
    """||d_y u_Phi||_{B^1/2}."""
    if rs.theta >= rs.threshold:
        raise BandExhausted(f"theta = {rs.theta:g} reached a/lambda = {rs.threshold:g}")
    u = hydro_state.u
    p = p or build_partition(u.grid)
    return _weighted_besov(p, ddy_array(u.coeffs, u.grid.dy, 1), rs.radius_phi)


def zeta_rate(ans_state, hydro_state, rs: RadiusState, p: DyadicPartition | None = None) -> float:
    """Anisotropic plus hydrostatic contribution, each under its own weight."""
    if rs.mu * rs.zeta >= rs.a:
        raise BandExhausted(f"mu*zeta = {rs.mu * rs.zeta:g} reached a = {rs.a:g}")
    return eta_rate(ans_state, rs, p) + theta_rate(hydro_state, rs, p)


def advance_radius(rs: RadiusState, rates, dt: float) -> RadiusState:
    """Trapezoid update against the previous rate sample, Euler if there is none."""
    rates = tuple(float(r) for r in rates)
    if len(rates) != 3:
        raise ValidationError("rates must be (eta_dot, theta_dot, zeta_dot)")
    if any(r < 0 for r in rates):
        raise ValidationError(f"negative rate in {rates}")
    if rs.prev_rates is None:
        inc = [dt * r for r in rates]
    else:
        inc = [0.5 * dt * (r0 + r1) for r0, r1 in zip(rs.prev_rates, rates)]
    return replace(
        rs,
        eta=rs.eta + inc[0],
        theta=rs.theta + inc[1],
        zeta=rs.zeta + inc[2],
        prev_rates=rates,
    )


def weighted_field(f: SpectralField, rs: RadiusState, which: str) -> SpectralField:
    """Apply exp(radius |xi|) for which in {'psi', 'phi', 'theta'}."""
    radius = {
        "psi": rs.radius_psi,
        "phi": rs.radius_phi,
        "theta": rs.radius_theta,
    }[which.lower()]
    if radius < 0:
        raise BandExhausted(f"{which} radius is negative ({radius:g})")
    return f.with_coeffs(f.coeffs * analytic_multiplier(f.grid, radius)[:, None])


def theta_dominated(rs: RadiusState, grid) -> bool:
    """exp(Theta|k|) <= min(exp(Psi|k|), exp(Phi|k|)) on every wavenumber."""
    xi = np.abs(grid.kx)
    th = rs.radius_theta * xi
    return bool(np.all(th <= np.minimum(rs.radius_psi * xi, rs.radius_phi * xi) + 1e-15))


@dataclass
class AprioriReport:
    sup_state: float
    dy_l2: float
    eps2_three_half: float
    ratios: tuple
    eta: float
    margin: float
    within_margin: bool
    within_constant: bool

    def as_dict(self):
        return dict(self.__dict__)


def apriori_monitor(
    series: dict, rs: RadiusState, data_norm: float, eps: float = 0.0, c_monitor: float = 10.0
) -> AprioriReport:
    """Left-hand sides of the uniform bound and their ratios to the data norm.

    ``series`` must hold NormSeries under 'state' (exp(Kt)-weighted (u, eps v)_Psi)
    and 'dy_state' (its d_y counterpart).
    """
    lhs1 = chemin_lerner(series["state"], np.inf, 0.5)
    lhs2 = chemin_lerner(series["dy_state"], 2, 0.5)
    lhs3 = eps**2 * chemin_lerner(series["state"], 2, 1.5)
    vals = (lhs1, lhs2, lhs3)
    ratios = tuple(v / data_norm if data_norm > 0 else 0.0 for v in vals)
    margin = rs.a / (2 * rs.lam)
    return AprioriReport(
        lhs1,
        lhs2,
        lhs3,
        ratios,
        rs.eta,
        margin,
        rs.eta <= margin,
        all(r <= c_monitor for r in ratios),
    )


class WeightedNormRecorder:
    """Observer recording exp(Kt)-weighted block norms of (u, eps v)_Psi and d_y of it.

    The band radius is read from ``radius_fn()`` at each call so it can follow a
    tracker; by default the radius is fixed at ``a``.
    """

    def __init__(self, partition: DyadicPartition, kappa: float, radius_fn, use_v: bool = True):
        self.p = partition
        self.kappa = kappa
        self.radius_fn = radius_fn
        self.use_v = use_v
        self.series = {
            "state": NormSeries.for_partition(partition),
            "dy_state": NormSeries.for_partition(partition),
            "plain": NormSeries.for_partition(partition),
        }

    def __call__(self, state):
        g = self.p.grid
        dy = g.dy
        eps = getattr(state, "eps", 0.0)
        w = analytic_multiplier(g, max(self.radius_fn(), 0.0)) ** 2
        comps = [state.u.coeffs]
        if self.use_v and state.v is not None and eps > 0:
            comps.append(eps * state.v.coeffs)
        e = sum(mode_energy(c, dy) for c in comps)
        ed = sum(mode_energy(ddy_array(c, dy, 1), dy) for c in comps)
        growth = np.exp(2 * self.kappa * state.t)
        self.series["plain"].append(state.t, block_norms_from_energy(self.p, e))
        self.series["state"].append(state.t, block_norms_from_energy(self.p, growth * w * e))
        self.series["dy_state"].append(state.t, block_norms_from_energy(self.p, growth * w * ed))
