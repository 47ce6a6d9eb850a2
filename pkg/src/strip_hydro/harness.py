"""
Paired anisotropic/hydrostatic runs, error norms, rate fits and reports.

A *pair* advances the scaled anisotropic system at one eps and the
hydrostatic system in lockstep from the same initial data, carrying an
analyticity tracker for both. Errors w1 = u^eps - u, w2 = v^eps - v are
measured under the Theta weight of the pair's own tracker.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .anisotropic import (
    ANSConfig,
    advective_tendency,
    energy_residual,
    initial_data_scaled,
    step_ans,
)
from .errors import BandExhausted, ValidationError
from .grid import (
    Grid,
    PhysicalField,
    SpectralField,
    _ddx_multiplier,
    ddy_array,
    forward_transform,
    l2_norm,
    mode_energy,
    poincare_constant,
)
from .hydrostatic import HydroConfig, HydroState, hydro_vertical, initial_hydro, step_hydro
from .littlewood_paley import (
    NormSeries,
    analytic_multiplier,
    apply_analytic_weight,
    besov_norm,
    block_norms_from_energy,
    build_partition,
    chemin_lerner,
)
from .tracker import RadiusState, advance_radius, apriori_monitor, eta_rate, theta_rate

log = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = ("eps", "E_half", "E_dy", "E_three_half")
NORMS_COLUMNS = ("time", "s", "besov_norm", "eta", "theta", "zeta", "radius_estimate")
DECAY_COLUMNS = ("t", "l2", "b_half")
SUMMARY_KEYS = ("slope", "residual", "kappa", "eta_final", "theta_final", "zeta_final", "alive")
SMALLNESS_FACTOR = 0.05


@dataclass(frozen=True)
class RunConfig:
    nx: int = 64
    ny: int = 129
    lx: float = 2 * np.pi
    dt: float = 5e-4
    t_end: float = 1.0
    eps_list: tuple = (0.2, 0.1, 0.05, 0.025)
    delta: float = 1e-2
    k0: int = 1
    a: float = 0.5
    lam: float = 4.0
    mu: float | None = None  # defaults to 4 * lam
    divergence_tol: float = 1e-8
    cadence: int = 10
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        object.__setattr__(self, "eps_list", eps)
        if not eps:
            raise ValidationError("eps_list is empty")
        if any(not 0 < e <= 1 for e in eps):
            raise ValidationError(f"every eps must lie in (0, 1]: {eps}")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValidationError(f"eps_list must be strictly decreasing: {eps}")
        if self.mu is None:
            object.__setattr__(self, "mu", 4.0 * self.lam)
        if self.mu < self.lam:
            raise ValidationError(f"mu ({self.mu}) must be >= lambda ({self.lam})")
        if self.cadence < 1:
            raise ValidationError("cadence must be >= 1")
        if not self.dt > 0 or self.t_end < 0:
            raise ValidationError("need dt > 0 and t_end >= 0")

    @property
    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.lx)

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))


def reference_data(cfg: RunConfig) -> SpectralField:
    """u0 = delta cos(k0 x) sin(2 pi y): zero on the walls, zero vertical mean."""
    g = cfg.grid
    kk = cfg.k0 * 2 * np.pi / cfg.lx
    return forward_transform(
        PhysicalField.from_function(g, lambda x, y: cfg.delta * np.cos(kk * x) * np.sin(2 * np.pi * y))
    )


def smallness_gate(u0: SpectralField, a: float, factor: float = SMALLNESS_FACTOR) -> tuple[float, bool]:
    """Return (||e^{a|D|} u0||_{B^1/2}, passes) for the rule norm <= factor * a."""
    val = besov_norm(build_partition(u0.grid), apply_analytic_weight(u0, a), 0.5)
    return val, bool(val <= factor * a)


# -- error fields and remainders --------------------------------------------------


def error_fields(ans, hydro: HydroState, dt: float | None = None) -> tuple[SpectralField, SpectralField]:
    if ans.u.grid != hydro.u.grid:
        raise ValidationError("grids differ")
    tol = 0.5 * dt if dt is not None else 1e-12
    if abs(ans.t - hydro.t) > tol:
        raise ValidationError(f"time mismatch: ans t={ans.t:g}, hydro t={hydro.t:g}")
    hv = hydro.v if hydro.v is not None else SpectralField.zeros(hydro.u.grid)
    return ans.u - hydro.u, ans.v - hv


def remainder_norms(history, eps: float, ans_history=None) -> dict:
    """Time-L2 norms of the explicit eps^2 remainder terms along a hydrostatic trajectory.

    ``history`` is a sequence of HydroState (with ``v`` set); when
    ``ans_history`` is given the products in the R2 bracket use the
    anisotropic fields, otherwise the hydrostatic ones.
    """
    if len(history) < 2:
        raise ValidationError("need at least two samples")
    g = history[0].u.grid
    t = np.array([h.t for h in history])
    mx = _ddx_multiplier(g)[:, None]
    vs = np.array([h.v.coeffs for h in history])
    dvdt = np.gradient(vs, t, axis=0)
    r1, bracket = [], []
    for i, h in enumerate(history):
        u, v = h.u.coeffs, vs[i]
        r1.append(eps**2 * l2_norm(h.u.with_coeffs(mx**2 * u)))
        if ans_history is not None:
            ua, va = ans_history[i].u.coeffs, ans_history[i].v.coeffs
        else:
            ua, va = u, v
        b = (
            dvdt[i]
            - eps**2 * (mx**2 * v)
            - ddy_array(v, g.dy, 2)
            - advective_tendency(ua, va, va, g, True)
        )
        b[:, [0, -1]] = 0
        bracket.append(l2_norm(h.u.with_coeffs(b)))
    l2t = lambda a: float(np.sqrt(np.trapezoid(np.square(a), t)))  # noqa: E731
    return {
        "R1_dxx": l2t(r1),
        "R2": eps**2 * l2t(bracket),
        "bracket": l2t(bracket),
    }


# -- fits ---------------------------------------------------------------------------


def fit_convergence(eps, errors) -> tuple[float, float]:
    """Least-squares slope of log E against log eps and the max log-space deviation."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > 0
    if not np.all(keep):
        log.warning("excluding %d zero-error rows from the fit", int((~keep).sum()))
    if keep.sum() < 3:
        raise ValidationError("need at least 3 rows with nonzero error")
    x, y = np.log(eps[keep]), np.log(errors[keep])
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + icpt))))
    return float(slope), resid


def fit_decay(series, window, s: float = 0.5) -> float:
    """Exponential decay rate of ||u(t)||_{B^s} over ``window`` (log-linear fit).

    ``series`` is a NormSeries or a pair (times, values).
    """
    if isinstance(series, NormSeries):
        t, vals = np.array(series.times), series.besov_series(s)
    else:
        t, vals = (np.asarray(a, dtype=float) for a in series)
    t0, t1 = window
    if t0 < t[0] - 1e-12 or t1 > t[-1] + 1e-12 or not t1 > t0:
        raise ValidationError(f"window {window} outside run [{t[0]:g}, {t[-1]:g}]")
    sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
    if sel.sum() < 2:
        raise ValidationError("fewer than two samples in window")
    if np.any(vals[sel] <= 0):
        raise ValidationError("nonpositive norm inside the fit window")
    return float(-np.polyfit(t[sel], np.log(vals[sel]), 1)[0])


# -- paired runs ----------------------------------------------------------------------


@dataclass
class PairResult:
    eps: float
    E_half: float
    E_dy: float
    E_three_half: float
    sup_state: float  # sup_t ||(u, eps v)||_{B^1/2}
    dy_pressure: float  # sup_t ||d_y p^eps||_{L2}
    max_energy_residual: float
    eta: float
    theta: float
    zeta: float
    alive: bool
    a: float
    lam: float
    mu: float
    kappa: float
    apriori: dict = field(default_factory=dict)
    remainders: dict = field(default_factory=dict)
    m_proxy: float = 1.0
    hydro_times: list = field(default_factory=list, repr=False)
    hydro_b_half: list = field(default_factory=list, repr=False)
    hydro_l2: list = field(default_factory=list, repr=False)

    @property
    def row(self) -> tuple:
        return (self.eps, self.E_half, self.E_dy, self.E_three_half)


def _rates(ans, hydro, rs, p):
    er = eta_rate(ans, rs, p)
    tr = theta_rate(hydro, rs, p)
    return er, tr, er + tr


def paired_run(cfg: RunConfig, eps: float, u0: SpectralField | None = None, remainders: bool = True) -> PairResult:
    g = cfg.grid
    u0 = reference_data(cfg) if u0 is None else u0
    ac = ANSConfig(g, cfg.dt, cfg.t_end, eps, cfg.divergence_tol)
    hc = HydroConfig(g, cfg.dt, cfg.t_end)
    ans = initial_data_scaled(u0, eps)
    hyd = initial_hydro(u0)
    p = build_partition(g)
    kappa = poincare_constant(g)
    rs = RadiusState(cfg.a, cfg.lam, cfg.mu, kappa=kappa)
    rs = rs.primed(_rates(ans, hyd, rs, p))
    dy = g.dy

    err = NormSeries.for_partition(p)
    err_dy = NormSeries.for_partition(p)
    state = NormSeries.for_partition(p)
    psi_state = NormSeries.for_partition(p)
    psi_dy = NormSeries.for_partition(p)
    hydro = NormSeries.for_partition(p)
    hl2 = []
    dyp = 0.0
    hist_h, hist_a = [], []
    stride = max(cfg.cadence, cfg.nsteps // 100) if cfg.nsteps else 1

    def record(a, h, rs):
        w1, w2 = error_fields(a, h, cfg.dt)
        wt = analytic_multiplier(g, rs.radius_theta)[:, None] ** 2
        e = mode_energy(w1.coeffs, dy) + eps**2 * mode_energy(w2.coeffs, dy)
        ed = mode_energy(ddy_array(w1.coeffs, dy, 1), dy) + eps**2 * mode_energy(
            ddy_array(w2.coeffs, dy, 1), dy
        )
        err.append(a.t, block_norms_from_energy(p, wt[:, 0] * e))
        err_dy.append(a.t, block_norms_from_energy(p, wt[:, 0] * ed))
        es = mode_energy(a.u.coeffs, dy) + eps**2 * mode_energy(a.v.coeffs, dy)
        eds = mode_energy(ddy_array(a.u.coeffs, dy, 1), dy) + eps**2 * mode_energy(
            ddy_array(a.v.coeffs, dy, 1), dy
        )
        state.append(a.t, block_norms_from_energy(p, es))
        grow = np.exp(2 * kappa * a.t) * analytic_multiplier(g, rs.radius_psi) ** 2
        psi_state.append(a.t, block_norms_from_energy(p, grow * es))
        psi_dy.append(a.t, block_norms_from_energy(p, grow * eds))
        eh = mode_energy(h.u.coeffs, dy)
        hydro.append(h.t, block_norms_from_energy(p, eh))
        hl2.append(float(np.sqrt(eh.sum())))

    record(ans, hyd, rs)
    if remainders:
        hist_h.append(hyd)
        hist_a.append(ans)
    max_res = 0.0
    n = cfg.nsteps
    for i in range(n):
        new_ans = step_ans(ans, ac)
        max_res = max(max_res, abs(energy_residual(ans, new_ans, cfg.dt)))
        ans = new_ans
        hyd = step_hydro(hyd, hc)
        rs = advance_radius(rs, _rates(ans, hyd, rs, p), cfg.dt)
        if not rs.alive:
            raise BandExhausted(
                f"band exhausted at t={ans.t:g} (eps={eps}): eta={rs.eta:g}, theta={rs.theta:g}, zeta={rs.zeta:g}"
            )
        dyp = max(dyp, l2_norm(ans.p.with_coeffs(ddy_array(ans.p.coeffs, dy, 1))))
        if (i + 1) % cfg.cadence == 0 or i + 1 == n:
            record(ans, hyd, rs)
        if remainders and ((i + 1) % stride == 0 or i + 1 == n):
            hist_h.append(hyd)
            hist_a.append(ans)

    v0 = hydro_vertical(u0)
    data_norm = besov_norm(
        p, (apply_analytic_weight(u0, cfg.a), apply_analytic_weight(v0, cfg.a) * eps), 0.5
    )
    mon = apriori_monitor({"state": psi_state, "dy_state": psi_dy}, rs, data_norm, eps)
    rem = remainder_norms(hist_h, eps, hist_a) if remainders and len(hist_h) > 1 else {}
    m_proxy = max(1.0, float(hydro.besov_series(0.5).max()), float(hydro.besov_series(1.5).max()))
    return PairResult(
        eps=eps,
        E_half=chemin_lerner(err, np.inf, 0.5),
        E_dy=chemin_lerner(err_dy, 2, 0.5),
        E_three_half=eps * chemin_lerner(err, 2, 1.5),
        sup_state=float(state.besov_series(0.5).max()),
        dy_pressure=dyp,
        max_energy_residual=max_res,
        eta=rs.eta,
        theta=rs.theta,
        zeta=rs.zeta,
        alive=rs.alive,
        a=rs.a,
        lam=rs.lam,
        mu=rs.mu,
        kappa=kappa,
        apriori=mon.as_dict(),
        remainders=rem,
        m_proxy=m_proxy,
        hydro_times=list(hydro.times),
        hydro_b_half=list(hydro.besov_series(0.5)),
        hydro_l2=hl2,
    )



# -- sweeps and reports -------------------------------------------------------------


@dataclass
class ConvergenceReport:
    rows: list  # (eps, E_half, E_dy, E_three_half), eps descending
    slope: float
    residual: float
    pairs: list = field(default_factory=list, repr=False)
    smallness: float = 0.0
    smallness_ok: bool = True

    @property
    def eps(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def errors(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    def monotone(self) -> bool:
        e = self.errors
        return bool(np.all(np.diff(e) < 0))

    def summary(self) -> dict:
        """The JSON summary; tracker values are the worst case over the sweep."""
        return {
            "slope": self.slope,
            "residual": self.residual,
            "kappa": self.pairs[0].kappa if self.pairs else float("nan"),
            "eta_final": max((p.eta for p in self.pairs), default=0.0),
            "theta_final": max((p.theta for p in self.pairs), default=0.0),
            "zeta_final": max((p.zeta for p in self.pairs), default=0.0),
            "alive": all(p.alive for p in self.pairs),
        }


def _worker_count(n: int) -> int:
    env = os.environ.get("STRIP_HYDRO_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ValidationError(f"STRIP_HYDRO_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ValidationError("STRIP_HYDRO_THREADS must be >= 1")
    return max(1, min(n, cap))


def _pair_task(args):
    cfg, eps = args
    return paired_run(cfg, eps)


def run_sweep(cfg: RunConfig, workers: int | None = None) -> ConvergenceReport:
    """Paired runs over ``cfg.eps_list`` and the fitted convergence slope."""
    u0 = reference_data(cfg)
    small, ok = smallness_gate(u0, cfg.a)
    if not ok:
        log.warning("smallness gate fails: %.3g > %.3g", small, SMALLNESS_FACTOR * cfg.a)
    workers = _worker_count(len(cfg.eps_list)) if workers is None else workers
    tasks = [(cfg, e) for e in cfg.eps_list]
    if workers == 1:
        pairs = [_pair_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            pairs = list(ex.map(_pair_task, tasks))
    pairs.sort(key=lambda r: -r.eps)
    rows = [r.row for r in pairs]
    if len(rows) >= 3:
        slope, resid = fit_convergence([r[0] for r in rows], [r[1] for r in rows])
    else:
        slope, resid = float("nan"), float("nan")
    return ConvergenceReport(rows, slope, resid, pairs, small, ok)


def decay_run(cfg: RunConfig, linear: bool = False, u0: SpectralField | None = None):
    """Hydrostatic run recording (t, ||u||_L2, ||u||_{B^1/2}) at the configured cadence."""
    from .hydrostatic import run_hydro

    g = cfg.grid
    u0 = reference_data(cfg) if u0 is None else u0
    p = build_partition(g)
    series = NormSeries.for_partition(p)
    l2 = []

    def obs(state):
        e = mode_energy(state.u.coeffs, g.dy)
        series.append(state.t, block_norms_from_energy(p, e))
        l2.append(float(np.sqrt(e.sum())))

    run_hydro(HydroConfig(g, cfg.dt, cfg.t_end, nonlinear=not linear), u0, [obs], cfg.cadence)
    rows = list(zip(series.times, l2, series.besov_series(0.5)))
    return series, rows


def norms_row(f: SpectralField, s: float, t: float = 0.0, rs: RadiusState | None = None) -> tuple:
    """One norm-report row: time, s, besov_norm, eta, theta, zeta, radius_estimate."""
    from .errors import InsufficientSpectrum
    from .littlewood_paley import estimate_radius

    p = build_partition(f.grid)
    try:
        r = estimate_radius(f, p)
    except InsufficientSpectrum:
        r = float("nan")
    eta, theta, zeta = (rs.eta, rs.theta, rs.zeta) if rs is not None else (0.0, 0.0, 0.0)
    return (t, s, besov_norm(p, f, s), eta, theta, zeta, r)


# -- serialization ------------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path, columns, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            if len(r) != len(columns):
                raise ValidationError(f"row of length {len(r)} for {len(columns)} columns")
            w.writerow([_fmt(x) for x in r])


def format_csv_row(row) -> str:
    return ",".join(_fmt(x) for x in row)


def read_csv(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [tuple(float(x) for x in line) for line in r if line]
    return header, rows


def write_summary(path, summary: dict) -> None:
    missing = set(SUMMARY_KEYS) - set(summary)
    if missing:
        raise ValidationError(f"summary lacks {sorted(missing)}")
    out = {k: summary[k] for k in SUMMARY_KEYS}
    for k, v in out.items():
        if isinstance(v, (float, np.floating)) and not math.isfinite(v):
            out[k] = None
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(out, indent=2) + "\n")


def write_report(report: ConvergenceReport, outdir) -> dict:
    """convergence.csv + summary.json (+ pairs.json with the per-eps diagnostics)."""
    outdir = Path(outdir)
    write_csv(outdir / "convergence.csv", CONVERGENCE_COLUMNS, report.rows)
    summary = report.summary()
    write_summary(outdir / "summary.json", summary)
    detail = []
    for p in report.pairs:
        d = asdict(p)
        for k in ("hydro_times", "hydro_b_half", "hydro_l2"):
            d.pop(k)
        detail.append(d)
    (outdir / "pairs.json").write_text(json.dumps(detail, indent=2, default=float) + "\n")
    return summary
