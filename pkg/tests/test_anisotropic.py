import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strip_hydro.anisotropic import (
    ANSConfig,
    ANSState,
    energy,
    energy_residual,
    initial_data_scaled,
    nonlinear_tendency_ans,
    pressure_solve_ans,
    run_ans,
    step_ans,
)
from strip_hydro.errors import (
    BoundaryError,
    CompatibilityError,
    InstabilityError,
    ValidationError,
)
from strip_hydro.grid import (
    Grid,
    PhysicalField,
    SpectralField,
    box_divergence,
    ddx,
    ddy,
    forward_transform,
    inverse_transform,
    l2_norm,
    poincare_constant,
)
from strip_hydro.littlewood_paley import besov_norm, build_partition

from .fields import random_dirichlet


def phys(g, fn):
    return forward_transform(PhysicalField.from_function(g, fn))


def single_mode(g, delta=1e-2, k=1):
    return phys(g, lambda x, y: delta * np.cos(k * x) * np.sin(2 * np.pi * y))


class TestInitialData:
    g = Grid(16, 65)

    def test_zero(self):
        s = initial_data_scaled(SpectralField.zeros(self.g), 0.1)
        assert l2_norm(s.u, s.v, s.p) == 0.0 and s.t == 0.0

    def test_single_mode_vertical_velocity(self):
        d = 1e-2
        s = initial_data_scaled(single_mode(self.g, d), 0.1)
        X, Y = self.g.meshgrid()
        exact = d * np.sin(X) * (1 - np.cos(2 * np.pi * Y)) / (2 * np.pi)
        assert np.max(np.abs(inverse_transform(s.v).values - exact)) < 5 * d * self.g.dy**2
        assert np.sqrt(np.mean(np.abs(box_divergence(s.u, s.v)) ** 2)) <= 1e-8

    def test_compatibility_violation(self):
        u0 = phys(self.g, lambda x, y: np.cos(x) * y * (1 - y))
        with pytest.raises(CompatibilityError):
            initial_data_scaled(u0, 0.1)

    def test_boundary_violation(self):
        u0 = phys(self.g, lambda x, y: np.cos(x) * (1 + 0 * y))
        with pytest.raises(BoundaryError):
            initial_data_scaled(u0, 0.1)

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            ANSConfig(self.g, dt=0.0, t_end=1.0, eps=0.1)
        with pytest.raises(ValidationError):
            ANSConfig(self.g, dt=1e-3, t_end=1.0, eps=1.5)


class TestNonlinear:
    g = Grid(16, 33)

    def state(self, u, v=None):
        v = SpectralField.zeros(self.g) if v is None else v
        return ANSState(u, v, SpectralField.zeros(self.g), 0.0, 0.1)

    def test_zero(self):
        nu, nv = nonlinear_tendency_ans(self.state(SpectralField.zeros(self.g)))
        assert l2_norm(nu, nv) == 0.0

    def test_burgers_identity(self):
        u = phys(self.g, lambda x, y: np.sin(x) * y * (1 - y))
        nu, nv = nonlinear_tendency_ans(self.state(u))
        expected = phys(self.g, lambda x, y: -0.5 * np.sin(2 * x) * (y * (1 - y)) ** 2)
        assert np.max(np.abs(nu.coeffs - expected.coeffs)) < 1e-14
        assert l2_norm(nv) == 0.0

    def test_constant_shift(self):
        u = random_dirichlet(self.g, 2, kmax=4)
        v = random_dirichlet(self.g, 3, kmax=4)
        c = 0.7
        shifted = u.with_coeffs(u.coeffs + c * (np.arange(self.g.nx) == 0)[:, None])
        n0, _ = nonlinear_tendency_ans(self.state(u, v))
        n1, _ = nonlinear_tendency_ans(self.state(shifted, v))
        assert np.max(np.abs(n1.coeffs - (n0.coeffs - c * ddx(u).coeffs))) < 1e-13


class TestPressureSolve:
    def test_divergence_free_predictor(self):
        # u = sin x (1 - 2y), v = cos x (y^2 - y): collocated divergence is exactly zero
        g = Grid(16, 33)
        u = phys(g, lambda x, y: np.sin(x) * (1 - 2 * y))
        v = phys(g, lambda x, y: np.cos(x) * (y**2 - y))
        q = pressure_solve_ans(u, v, 0.2, 1e-3)
        assert np.max(np.abs(q.coeffs)) < 1e-10
        zero = SpectralField.zeros(g)
        assert l2_norm(pressure_solve_ans(zero, zero, 0.2, 1e-3)) == 0.0

    def test_manufactured_round_trip(self):
        eps, dt = 0.5, 1e-2
        errs = []
        for ny in (33, 65, 129):
            g = Grid(8, ny)
            q = phys(g, lambda x, y: np.cos(x) * np.cos(np.pi * y))
            lq = (-1 - np.pi**2 / eps**2) * q.coeffs
            m = 1j * g.kx[:, None]
            c = np.zeros_like(lq)
            c[[1, -1]] = dt * lq[[1, -1]] / m[[1, -1]]
            got = pressure_solve_ans(q.with_coeffs(c), SpectralField.zeros(g), eps, dt)
            errs.append(np.max(np.abs(got.coeffs - q.coeffs)))
        assert errs[-1] < 1e-3
        assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)
        assert np.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.2)

    def test_y_variation_shrinks_with_eps(self):
        g = Grid(8, 65)
        ru = phys(g, lambda x, y: np.sin(x) * np.sin(np.pi * y) ** 2)
        zero = SpectralField.zeros(g)
        dq = [l2_norm(ddy(pressure_solve_ans(ru, zero, e, 1e-2))) for e in (0.4, 0.2, 0.1, 0.05)]
        assert all(b < a for a, b in zip(dq, dq[1:]))

    def test_needs_positive_eps(self):
        g = Grid(8, 9)
        z = SpectralField.zeros(g)
        with pytest.raises(ValidationError):
            pressure_solve_ans(z, z, 0.0, 1e-3)


class TestStep:
    def test_zero_state(self):
        g = Grid(8, 17)
        cfg = ANSConfig(g, 1e-3, 1.0, 0.1)
        s = step_ans(initial_data_scaled(SpectralField.zeros(g), 0.1), cfg)
        assert l2_norm(s.u, s.v) == 0.0 and s.t == pytest.approx(1e-3)

    def test_linear_lowest_mode_is_crank_nicolson(self):
        g = Grid(8, 65)
        dt, eps = 1e-3, 0.1
        u0 = phys(g, lambda x, y: 1e-2 * np.sin(np.pi * y) + 0 * x)
        cfg = ANSConfig(g, dt, 1.0, eps, nonlinear=False)
        s0 = initial_data_scaled(u0, eps)
        s1 = step_ans(s0, cfg)
        factor = s1.u.coeffs[0, 32].real / s0.u.coeffs[0, 32].real
        lam_h = 2 * (1 - np.cos(np.pi * g.dy)) / g.dy**2
        assert factor == pytest.approx((1 - dt * lam_h / 2) / (1 + dt * lam_h / 2), rel=1e-12)
        cn = (1 - dt * np.pi**2 / 2) / (1 + dt * np.pi**2 / 2)
        assert abs(factor - cn) < 5 * dt * g.dy**2 * np.pi**4

    def test_energy_identity_and_invariants(self):
        g = Grid(16, 33)
        dt = 1e-3
        cfg = ANSConfig(g, dt, 1.0, 0.2)
        s = initial_data_scaled(single_mode(g, 5e-2), 0.2)
        for _ in range(40):
            new = step_ans(s, cfg)
            assert abs(energy_residual(s, new, dt)) <= 10 * dt**3
            assert np.all(new.u.coeffs[:, [0, -1]] == 0)
            assert np.max(np.abs(new.v.coeffs[:, [0, -1]])) < 1e-10
            assert np.sqrt(np.mean(np.abs(box_divergence(new.u, new.v)) ** 2)) <= 1e-8
            s = new

    @settings(max_examples=8, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.sampled_from([0.5, 0.2, 0.05]))
    def test_energy_nonincreasing(self, seed, eps):
        g = Grid(16, 17)
        dt = 1e-3
        u0 = random_dirichlet(g, seed, kmax=5)
        u0 = u0 * (1e-2 / l2_norm(u0))
        cfg = ANSConfig(g, dt, 1.0, eps)
        s = initial_data_scaled(u0, eps)
        e = energy(s.u, s.v, eps)
        for _ in range(5):
            s = step_ans(s, cfg)
            e_new = energy(s.u, s.v, eps)
            assert e_new <= e + 10 * dt**3
            e = e_new

    def test_instability_reported(self):
        g = Grid(16, 17)
        cfg = ANSConfig(g, 0.5, 100.0, 1.0)
        s = initial_data_scaled(single_mode(g, 200.0), 1.0)
        with pytest.raises(InstabilityError), np.errstate(all="ignore"):
            for _ in range(200):
                s = step_ans(s, cfg)


class TestRun:
    def test_zero_horizon(self):
        g = Grid(8, 17)
        seen = []
        res = run_ans(ANSConfig(g, 1e-3, 0.0, 0.1), single_mode(g), [seen.append])
        assert res.steps == 0 and len(seen) == 1

    def test_uniform_bound_monitor(self):
        g = Grid(16, 33)
        p = build_partition(g)
        kappa = poincare_constant(g)
        vals = []

        def obs(s):
            vals.append(np.exp(kappa * s.t) * besov_norm(p, (s.u, s.eps * s.v), 0.5))

        run_ans(ANSConfig(g, 2e-3, 0.3, 0.1), single_mode(g), [obs], cadence=5)
        assert max(vals) <= 2 * vals[0]

    def test_spectral_exactness_in_x(self):
        finals = []
        for nx in (16, 32):
            g = Grid(nx, 33)
            res = run_ans(ANSConfig(g, 2e-3, 0.1, 0.2), single_mode(g, 1e-2))
            c = res.state.u.coeffs
            finals.append(np.concatenate([c[:5], c[-4:]]))
        assert np.max(np.abs(finals[0] - finals[1])) < 1e-10
