import numpy as np
import pytest

from strip_hydro.anisotropic import energy_residual
from strip_hydro.errors import CompatibilityError
from strip_hydro.grid import (
    Grid,
    PhysicalField,
    SpectralField,
    ddy,
    forward_transform,
    l2_norm,
    poincare_constant,
    trapz_y,
)
from strip_hydro.harness import fit_decay
from strip_hydro.hydrostatic import (
    HydroConfig,
    dt_u_norm_monitor,
    dt_u_residual,
    initial_hydro,
    pressure_solve_hydro,
    run_hydro,
    step_hydro,
)
from strip_hydro.littlewood_paley import apply_analytic_weight, besov_norm, build_partition
from strip_hydro.tracker import RadiusState, advance_radius, theta_rate


def phys(g, fn):
    return forward_transform(PhysicalField.from_function(g, fn))


def single_mode(g, delta=1e-2):
    return phys(g, lambda x, y: delta * np.cos(x) * np.sin(2 * np.pi * y))


class TestPressureFormula:
    def test_zero(self):
        g = Grid(8, 17)
        assert l2_norm(pressure_solve_hydro(SpectralField.zeros(g))) == 0.0

    def test_x_independent(self):
        g = Grid(8, 17)
        u = phys(g, lambda x, y: np.sin(np.pi * y) + 0 * x)
        assert np.max(np.abs(pressure_solve_hydro(u).coeffs)) < 1e-14

    def test_manufactured_second_order(self):
        errs = []
        for ny in (33, 65, 129, 257):
            g = Grid(16, ny)
            u = phys(g, lambda x, y: np.sin(x) * np.sin(np.pi * y))
            p = pressure_solve_hydro(u)
            exact = phys(g, lambda x, y: 2 * np.pi * np.cos(x) + 0.25 * np.cos(2 * x) + 0 * y)
            errs.append(np.max(np.abs(p.coeffs - exact.coeffs)))
            assert np.all(p.coeffs == p.coeffs[:, :1])  # y-constant by construction
        rates = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(np.abs(rates - 2.0) <= 0.2)


class TestStep:
    def test_zero_state(self):
        g = Grid(8, 17)
        s = step_hydro(initial_hydro(SpectralField.zeros(g)), HydroConfig(g, 1e-3, 1.0))
        assert l2_norm(s.u) == 0.0 and s.t == pytest.approx(1e-3)

    def test_rejects_incompatible(self):
        g = Grid(8, 17)
        with pytest.raises(CompatibilityError):
            initial_hydro(phys(g, lambda x, y: np.cos(x) * y * (1 - y)))

    def test_linear_lowest_mode(self):
        g = Grid(8, 65)
        dt = 1e-3
        u0 = phys(g, lambda x, y: 1e-2 * np.sin(np.pi * y) + 0 * x)
        s0 = initial_hydro(u0)
        s1 = step_hydro(s0, HydroConfig(g, dt, 1.0, nonlinear=False))
        factor = s1.u.coeffs[0, 32].real / s0.u.coeffs[0, 32].real
        lam_h = 2 * (1 - np.cos(np.pi * g.dy)) / g.dy**2
        assert factor == pytest.approx((1 - dt * lam_h / 2) / (1 + dt * lam_h / 2), rel=1e-12)

    def test_invariants_and_energy(self):
        g = Grid(16, 33)
        dt = 1e-3
        cfg = HydroConfig(g, dt, 1.0)
        s = initial_hydro(single_mode(g, 5e-2))
        for _ in range(40):
            new = step_hydro(s, cfg)
            assert np.all(new.u.coeffs[:, [0, -1]] == 0)
            assert np.all(new.p.coeffs == new.p.coeffs[:, :1])
            assert np.max(np.abs(g.kx * trapz_y(new.u.coeffs, g.dy))) <= 1e-8
            assert np.all(new.v.coeffs[:, 0] == 0)
            assert np.max(np.abs(new.v.coeffs[:, -1])) <= 1e-8
            assert abs(energy_residual(s, new, dt)) <= 10 * dt**3
            s = new

    def test_multiplier_matches_formula(self):
        g = Grid(16, 65)
        cfg = HydroConfig(g, 1e-3, 1.0)
        s = initial_hydro(single_mode(g, 5e-2))
        for _ in range(20):
            s = step_hydro(s, cfg)
        scale = np.max(np.abs(s.p.coeffs))
        assert s.reprojection_residual <= 0.05 * scale


class TestRuns:
    g = Grid(16, 33)

    def test_zero_horizon(self):
        seen = []
        res = run_hydro(HydroConfig(self.g, 1e-3, 0.0), single_mode(self.g), [seen.append])
        assert res.steps == 0 and len(seen) == 1

    def test_decay_and_monitors(self):
        g = self.g
        a, lam = 0.5, 4.0
        p = build_partition(g)
        kappa = poincare_constant(g)
        u0 = single_mode(g)
        states = []
        res = run_hydro(HydroConfig(g, 2e-3, 1.0), u0, [states.append], cadence=10)
        t = np.array([s.t for s in states])
        l2 = np.array([l2_norm(s.u) for s in states])
        assert fit_decay((t, l2), (0.5, 1.0)) >= np.pi**2 / 2 - 0.5
        weighted = [np.exp(kappa * s.t) * besov_norm(p, s.u, 0.5) for s in states]
        assert max(weighted) <= 2 * weighted[0]
        # theta(T) < a / lambda along the recorded trajectory
        rs = RadiusState(a, lam, 4 * lam)
        rs = rs.primed((0.0, theta_rate(states[0], rs, p), 0.0))
        for prev, s in zip(states, states[1:]):
            rs = advance_radius(rs, (0.0, theta_rate(s, rs, p), 0.0), s.t - prev.t)
        assert 0 < rs.theta < a / lam
        assert res.state.t == pytest.approx(1.0)


class TestDtUMonitor:
    g = Grid(16, 33)

    def test_zero_trajectory(self):
        z = initial_hydro(SpectralField.zeros(self.g))
        cfg = HydroConfig(self.g, 1e-3, 1.0)
        assert dt_u_norm_monitor([z, step_hydro(z, cfg)]) == 0.0

    def test_residual_matches_time_difference(self):
        g = self.g
        dt = 1e-4
        cfg = HydroConfig(g, dt, 1.0)
        s0 = initial_hydro(single_mode(g, 1e-2))
        s1 = step_hydro(s0, cfg)
        s2 = step_hydro(s1, cfg)
        fd = (s2.u.coeffs - s0.u.coeffs) / (2 * dt)
        r = dt_u_residual(s1).coeffs
        assert np.max(np.abs(r - fd)) <= 1e-2 * np.max(np.abs(fd))

    def test_small_data_bound(self):
        g = self.g
        a = 0.5
        u0 = single_mode(g)
        states = []
        run_hydro(HydroConfig(g, 2e-3, 0.5), u0, [states.append], cadence=5)
        val = dt_u_norm_monitor(states)
        p = build_partition(g)
        bound = besov_norm(p, apply_analytic_weight(ddy(u0), a), 1.5) + besov_norm(
            p, apply_analytic_weight(u0, a), 2.5
        )
        assert np.isfinite(val) and 0 < val <= 10 * bound
