"""
IMEX stepping inside the discretely divergence-free space.

Both solvers evolve u in

    U = {u : u(k, 0) = u(k, 1) = 0,  trapz_y u(k, .) = 0 for k != 0}

with v = -d/dx cumtrapz(u), so the box divergence vanishes identically and v
vanishes on both walls. A Crank-Nicolson / Adams-Bashforth-2 step is solved as
a Galerkin problem in U with the energy inner product <u,u'> + eps^2 <v,v'>
(null-space method for the saddle-point system). The pressure is the
multiplier of the constraint and is recovered from the u-momentum residual.

At eps = 0 the same code is the hydrostatic scheme, so the anisotropic
solver converges to the hydrostatic one exactly as eps -> 0 at fixed mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import null_space

from .grid import Grid


def cumtrapz_matrix(ny: int, dy: float) -> np.ndarray:
    """Interior block of the cumulative-trapezoid matrix (walls held at 0)."""
    eye = np.eye(ny)
    full = cumulative_trapezoid(eye, dx=dy, axis=0, initial=0)
    return full[1:-1, 1:-1]


def stiffness_matrix(n: int, dy: float) -> np.ndarray:
    """-W d_yy on interior values of a Dirichlet profile."""
    return (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / dy


@dataclass
class SubspaceStepper:
    grid: Grid
    eps: float
    dt: float
    propagator: np.ndarray  # (nk, n, n): Z A^-1 B Z^T
    solve: np.ndarray  # (nk, n, n): Z A^-1 Z^T
    cint: np.ndarray  # (n, n)

    @classmethod
    def build(cls, grid: Grid, eps: float, dt: float) -> "SubspaceStepper":
        n = grid.ny - 2
        dy = grid.dy
        C = cumtrapz_matrix(grid.ny, dy)
        S = stiffness_matrix(n, dy)
        CtC = dy * C.T @ C
        CtSC = C.T @ S @ C
        I = np.eye(n)
        Z1 = null_space(np.ones((1, n)))
        e2 = eps**2
        nk = grid.nx // 2 + 1
        prop = np.empty((nk, n, n))
        sol = np.empty((nk, n, n))
        for i in range(nk):
            kx = grid.kx[i]
            k2 = kx**2
            mass = dy * I + e2 * k2 * CtC
            stiff = S + e2 * k2 * dy * I + e2 * k2 * (CtSC + e2 * k2 * CtC)
            Z = I if grid.k_int[i] == 0 else Z1
            A = Z.T @ (mass + 0.5 * dt * stiff) @ Z
            B = Z.T @ (mass - 0.5 * dt * stiff) @ Z
            Ainv = np.linalg.inv(A)
            prop[i] = Z @ Ainv @ B @ Z.T
            sol[i] = Z @ Ainv @ Z.T
        return cls(grid, eps, dt, prop, sol, C)

    @property
    def half(self) -> int:
        return self.grid.nx // 2 + 1

    def vertical(self, u: np.ndarray) -> np.ndarray:
        """v = -ik cumtrapz(u) for a full (nx, ny) coefficient array."""
        v = np.zeros_like(u)
        v[:, 1:-1] = -1j * self.grid.kx[:, None] * (u[:, 1:-1] @ self.cint.T)
        v[:, -1] = -1j * self.grid.kx * self.grid.dy * (
            u[:, 1:-1].sum(axis=1) + 0.5 * (u[:, 0] + u[:, -1])
        )
        return v

    def step(self, u: np.ndarray, fu: np.ndarray, fv: np.ndarray | None) -> np.ndarray:
        """Advance u one step given the explicit (AB-extrapolated) forcing.

        ``fu``/``fv`` are the explicit tendencies of the u- and v-momentum
        equations on the full grid; ``fv`` is ignored when eps = 0.
        """
        h = self.half
        dy = self.grid.dy
        rhs = dy * fu[:h, 1:-1]
        if fv is not None and self.eps > 0:
            kx = self.grid.kx[:h, None]
            rhs = rhs + 1j * self.eps**2 * kx * dy * (fv[:h, 1:-1] @ self.cint)
        ui = u[:h, 1:-1]
        new = np.einsum("kij,kj->ki", self.propagator, ui) + self.dt * np.einsum(
            "kij,kj->ki", self.solve, rhs
        )
        out = np.zeros_like(u)
        out[:h, 1:-1] = new
        nx = self.grid.nx
        # conjugate mirror for negative wavenumbers; Nyquist kept real
        out[h:, :] = np.conj(out[1 : nx // 2][::-1])
        out[nx // 2] = out[nx // 2].real
        return out

    def linear_rhs(self, u: np.ndarray) -> np.ndarray:
        """(eps^2 d_xx + d_yy) u on interior rows, zero on the walls."""
        dy = self.grid.dy
        out = np.zeros_like(u)
        out[:, 1:-1] = (u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2]) / dy**2
        out -= self.eps**2 * self.grid.kx[:, None] ** 2 * u * _interior_mask(u.shape)
        return out

    def pressure(self, u_old, u_new, fu) -> np.ndarray:
        """Recover p from the u-momentum residual: i k p = -(du/dt - L u_mid - f_u)."""
        mid = 0.5 * (u_old + u_new)
        r = (u_new - u_old) / self.dt - self.linear_rhs(mid) - fu
        kx = self.grid.kx[:, None]
        p = np.zeros_like(u_old)
        nz = self.grid.k_int != 0
        nz[self.grid.nx // 2] = False
        p[nz, 1:-1] = -r[nz, 1:-1] / (1j * kx[nz])
        p[:, 0] = 3 * p[:, 1] - 3 * p[:, 2] + p[:, 3] if u_old.shape[1] > 4 else p[:, 1]
        p[:, -1] = 3 * p[:, -2] - 3 * p[:, -3] + p[:, -4] if u_old.shape[1] > 4 else p[:, -2]
        return p


def _interior_mask(shape):
    m = np.zeros(shape)
    m[:, 1:-1] = 1.0
    return m


def project_to_subspace(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Orthogonal (trapezoid) projection onto U: zero walls, zero vertical mean for k != 0."""
    out = np.array(u, dtype=complex)
    out[:, 0] = 0
    out[:, -1] = 0
    nz = grid.k_int != 0
    out[nz, 1:-1] -= out[nz, 1:-1].mean(axis=1, keepdims=True)
    return out
