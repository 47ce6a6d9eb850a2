"""
Fields on the periodic strip [0, lx) x [0, 1].

x is spectral (one complex profile per wavenumber), y is a uniform grid with
both walls included. Coefficients are stored in numpy FFT order with the
Nyquist index reported as +nx/2, normalized so that
``coeffs = fft(values, axis=0) / nx`` (Parseval against the x-average).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import eigvalsh_tridiagonal

from .errors import BoundaryError, CompatibilityError, ValidationError


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    lx: float = 2 * np.pi

    def __post_init__(self):
        if self.nx <= 0 or self.nx % 2:
            raise ValidationError(f"nx must be a positive even integer, got {self.nx}")
        if self.ny < 3:
            raise ValidationError(f"ny must be >= 3, got {self.ny}")
        if not self.lx > 0:
            raise ValidationError(f"lx must be positive, got {self.lx}")

    @property
    def dy(self) -> float:
        return 1.0 / (self.ny - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * (self.lx / self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny)

    @cached_property
    def k_int(self) -> np.ndarray:
        """Integer wavenumbers in FFT order, Nyquist as +nx/2."""
        k = np.fft.fftfreq(self.nx, 1.0 / self.nx).round().astype(int)
        k[self.nx // 2] = self.nx // 2
        return k

    @cached_property
    def kx(self) -> np.ndarray:
        return self.k_int * (2 * np.pi / self.lx)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3 rule: keep |k| < nx/3."""
        return 3 * np.abs(self.k_int) < self.nx

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.ny, self.dy)
        w[0] = w[-1] = 0.5 * self.dy
        return w

    def meshgrid(self):
        return np.meshgrid(self.x, self.y, indexing="ij")


@dataclass(frozen=True)
class SpectralField:
    """Per-wavenumber complex profiles u_hat(k, y_j), shape (nx, ny)."""

    grid: Grid
    coeffs: np.ndarray
    real: bool = True

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.nx, self.grid.ny):
            raise ValidationError(
                f"coeffs shape {c.shape} does not match grid ({self.grid.nx}, {self.grid.ny})"
            )
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros((grid.nx, grid.ny), complex))

    def with_coeffs(self, coeffs) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.real)

    def __add__(self, other):
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, c):
        return self.with_coeffs(self.coeffs * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    def symmetry_defect(self) -> float:
        """max |u(-k) - conj(u(k))|."""
        c = self.coeffs
        mirror = np.conj(c[(-np.arange(self.grid.nx)) % self.grid.nx])
        return float(np.max(np.abs(c - mirror), initial=0.0))


@dataclass(frozen=True)
class PhysicalField:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.nx, self.grid.ny):
            raise ValidationError(
                f"values shape {v.shape} does not match grid ({self.grid.nx}, {self.grid.ny})"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "PhysicalField":
        X, Y = grid.meshgrid()
        return cls(grid, np.broadcast_to(fn(X, Y), X.shape).astype(float))


# -- transforms ---------------------------------------------------------------


def forward_transform(f: PhysicalField) -> SpectralField:
    return SpectralField(f.grid, np.fft.fft(f.values, axis=0) / f.grid.nx)


def inverse_transform(s: SpectralField, tol: float = 1e-10) -> PhysicalField:
    if not s.real:
        raise ValidationError("inverse_transform needs a conjugate-symmetric field")
    z = np.fft.ifft(s.coeffs, axis=0) * s.grid.nx
    scale = max(1.0, float(np.max(np.abs(z.real), initial=0.0)))
    residue = float(np.max(np.abs(z.imag), initial=0.0))
    if residue > tol * scale:
        raise ValidationError(f"imaginary residue {residue:.3e} after inverse transform")
    return PhysicalField(s.grid, z.real)


def to_physical(coeffs: np.ndarray) -> np.ndarray:
    """Unchecked inverse transform of a raw coefficient array."""
    return np.fft.ifft(coeffs, axis=0).real * coeffs.shape[0]


def to_spectral(values: np.ndarray) -> np.ndarray:
    return np.fft.fft(values, axis=0) / values.shape[0]


def dealias(s: SpectralField) -> SpectralField:
    return s.with_coeffs(s.coeffs * s.grid.dealias_mask[:, None])


# -- derivatives and quadrature ----------------------------------------------


def _ddx_multiplier(grid: Grid) -> np.ndarray:
    m = 1j * grid.kx
    m[grid.nx // 2] = 0.0  # Nyquist derivative is not representable for real data
    return m


def ddx(s: SpectralField) -> SpectralField:
    return s.with_coeffs(s.coeffs * _ddx_multiplier(s.grid)[:, None])


def ddy_array(c: np.ndarray, dy: float, order: int = 1) -> np.ndarray:
    """Second-order finite differences along the last axis."""
    out = np.empty_like(c)
    ny = c.shape[-1]
    if order == 1:
        out[..., 1:-1] = (c[..., 2:] - c[..., :-2]) / (2 * dy)
        out[..., 0] = (-3 * c[..., 0] + 4 * c[..., 1] - c[..., 2]) / (2 * dy)
        out[..., -1] = (3 * c[..., -1] - 4 * c[..., -2] + c[..., -3]) / (2 * dy)
    elif order == 2:
        out[..., 1:-1] = (c[..., 2:] - 2 * c[..., 1:-1] + c[..., :-2]) / dy**2
        if ny >= 4:
            out[..., 0] = (2 * c[..., 0] - 5 * c[..., 1] + 4 * c[..., 2] - c[..., 3]) / dy**2
            out[..., -1] = (2 * c[..., -1] - 5 * c[..., -2] + 4 * c[..., -3] - c[..., -4]) / dy**2
        else:
            out[..., 0] = out[..., 1]
            out[..., -1] = out[..., 1]
    else:
        raise ValidationError(f"ddy order must be 1 or 2, got {order}")
    return out


def ddy(s: SpectralField, order: int = 1) -> SpectralField:
    return s.with_coeffs(ddy_array(s.coeffs, s.grid.dy, order))


def integrate_y(s: SpectralField, upper: str = "y") -> SpectralField:
    """Composite trapezoid integral from 0 to y (``"y"``) or to 1 (``"1"``)."""
    c = cumulative_trapezoid(s.coeffs, dx=s.grid.dy, axis=1, initial=0)
    if upper == "1":
        c = np.repeat(c[:, -1:], s.grid.ny, axis=1)
    elif upper != "y":
        raise ValidationError(f"upper must be 'y' or '1', got {upper!r}")
    return s.with_coeffs(c)


def trapz_y(c: np.ndarray, dy: float) -> np.ndarray:
    """Trapezoid integral over y of the last axis."""
    return dy * (c.sum(axis=-1) - 0.5 * (c[..., 0] + c[..., -1]))


def vertical_velocity_from_u(u: SpectralField, tol: float = 1e-8) -> SpectralField:
    """v = -int_0^y du/dx; exact inverse of the trapezoid (box) divergence."""
    c = u.coeffs
    nonzero = u.grid.k_int != 0
    wall = np.max(np.abs(c[nonzero][:, [0, -1]]), initial=0.0)
    if wall > tol:
        raise BoundaryError(f"u does not vanish at the walls (max {wall:.3e})")
    v = -integrate_y(ddx(u), "y")
    top = float(np.max(np.abs(v.coeffs[:, -1]), initial=0.0))
    if top > tol:
        raise CompatibilityError(
            f"d/dx of the vertical mean of u is nonzero: |v(k, 1)| = {top:.3e}"
        )
    return v


def divergence(u: SpectralField, v: SpectralField) -> SpectralField:
    if u.grid != v.grid:
        raise ValidationError("divergence of fields on different grids")
    return ddx(u) + ddy(v, 1)


def box_divergence(u: SpectralField, v: SpectralField) -> np.ndarray:
    """Cell-centred divergence ik(u_j+u_{j+1})/2 + (v_{j+1}-v_j)/dy, shape (nx, ny-1).

    This is the constraint the solvers hold to round-off: a field whose v is the
    trapezoid primitive of -du/dx has zero box divergence.
    """
    m = _ddx_multiplier(u.grid)[:, None]
    cu, cv = u.coeffs, v.coeffs
    return m * 0.5 * (cu[:, 1:] + cu[:, :-1]) + (cv[:, 1:] - cv[:, :-1]) / u.grid.dy


# -- norms ---------------------------------------------------------------------


def mode_energy(c: np.ndarray, dy: float) -> np.ndarray:
    """Per-wavenumber trapezoid integral of |c(k, y)|^2."""
    return trapz_y(np.abs(c) ** 2, dy)


def l2_norm(*fields: SpectralField) -> float:
    """L2(S) norm (x-average convention) of one field or a stacked tuple."""
    dy = fields[0].grid.dy
    return float(np.sqrt(sum(mode_energy(f.coeffs, dy).sum() for f in fields)))


def dy_energy(c: np.ndarray, dy: float) -> np.ndarray:
    """Per-wavenumber sum of squared forward differences / dy.

    For Dirichlet profiles this is -<d_yy c, c> under the trapezoid rule, so it
    is the dissipation that pairs with the three-point Laplacian.
    """
    d = np.diff(c, axis=-1)
    return np.sum(np.abs(d) ** 2, axis=-1) / dy


def poincare_constant(grid: Grid) -> float:
    """Half the smallest eigenvalue of the Dirichlet three-point -d_yy."""
    n = grid.ny - 2
    diag = np.full(n, 2.0 / grid.dy**2)
    off = np.full(n - 1, -1.0 / grid.dy**2)
    lam = eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0]
    return 0.5 * float(lam)
