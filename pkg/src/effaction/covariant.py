"""Covariant geometry of the one-dimensional metric m(x).

Christoffel symbol, einbein, the covariant frequency Omega^2 (two
independent constructions), the Euler-Lagrange residual and the lattice
fluctuation kernels around a background path.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .model import Function1D, ModelSpec


@dataclass(frozen=True)
class Geometry:
    """Derived scalar/tensor functions of a model, built as expression trees."""

    gamma: Function1D
    einbein: Function1D
    omega_sq: Function1D
    omega_sq_lb: Function1D
    omega: Function1D
    z1: Function1D
    z1_alt: Function1D


_GEOMETRY: "weakref.WeakKeyDictionary[ModelSpec, Geometry]" = weakref.WeakKeyDictionary()


def _build_geometry(spec: ModelSpec) -> Geometry:
    m = spec.mass.base
    dm = spec.mass.deriv(1).base
    dv = spec.potential.deriv(1).base
    d2v = spec.potential.deriv(2).base

    gamma = ex.div(dm, ex.mul(2.0, m))
    einbein = ex.sqrt(m)
    # (V'' - gamma V') / m
    omega_sq = ex.div(ex.sub(d2v, ex.mul(gamma, dv)), m)
    # m^{-1/2} d/dx [ m^{1/2} V'/m ], differentiated structurally as a whole
    flux = ex.mul(einbein, ex.div(dv, m))
    omega_sq_lb = ex.div(ex.differentiate(flux, 1), einbein)

    omega = ex.sqrt(omega_sq)
    d_omega = ex.differentiate(omega, 1)
    d_omega_sq = ex.differentiate(omega_sq, 1)
    z1 = ex.div(ex.power(d_omega, 2), ex.mul(8.0, ex.power(omega, 3)))
    z1_alt = ex.div(ex.power(d_omega_sq, 2), ex.mul(32.0, ex.power(omega, 5)))
    return Geometry(
        gamma=Function1D(gamma),
        einbein=Function1D(einbein),
        omega_sq=Function1D(omega_sq),
        omega_sq_lb=Function1D(omega_sq_lb),
        omega=Function1D(omega),
        z1=Function1D(z1),
        z1_alt=Function1D(z1_alt),
    )


def geometry(spec: ModelSpec) -> Geometry:
    geo = _GEOMETRY.get(spec)
    if geo is None:
        geo = _build_geometry(spec)
        _GEOMETRY[spec] = geo
    return geo


def christoffel(spec: ModelSpec, x):
    """gamma(x) = m'(x) / (2 m(x))."""
    spec.mass_at(x)
    return geometry(spec).gamma(x)


def einbein(spec: ModelSpec, x):
    """h(x) = sqrt(m(x))."""
    spec.mass_at(x)
    return geometry(spec).einbein(x)


def einbein_residual(spec: ModelSpec, x):
    """Covariant derivative of the einbein, h' - gamma h; identically zero."""
    spec.mass_at(x)
    geo = geometry(spec)
    return geo.einbein.deriv(1)(x) - geo.gamma(x) * geo.einbein(x)


def omega_sq(spec: ModelSpec, x):
    """Omega^2 = (V'' - gamma V') / m. May be negative."""
    spec.mass_at(x)
    return geometry(spec).omega_sq(x)


def omega_sq_lb(spec: ModelSpec, x):
    """Omega^2 in Laplace-Beltrami form m^{-1/2} (m^{1/2} V'/m)'."""
    spec.mass_at(x)
    return geometry(spec).omega_sq_lb(x)


def el_residual(spec: ModelSpec, x, xdot, xddot):
    """Euler-Lagrange residual V' - m' xdot^2 / 2 - m xddot of the euclidean action."""
    spec.check_domain(x)
    m = spec.mass
    return spec.potential.deriv(1)(x) - 0.5 * m.deriv(1)(x) * xdot**2 - m(x) * xddot


# --- paths and kernels -----------------------------------------------------------

@dataclass(frozen=True)
class PathGrid:
    """Background orbit X(tau_i) on a uniform euclidean-time lattice."""

    tau0: float
    dtau: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 3:
            raise ValueError("a path needs at least 3 points")
        if not self.dtau > 0:
            raise ValueError(f"dtau must be positive, got {self.dtau}")
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must be finite")

    @classmethod
    def from_function(cls, f, tau0: float, tau1: float, n: int) -> "PathGrid":
        taus = np.linspace(tau0, tau1, n)
        return cls(tau0, (tau1 - tau0) / (n - 1), f(taus))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.tau0 + self.dtau * np.arange(self.n)

    @property
    def horizon(self) -> float:
        return self.dtau * (self.n - 1)

    def velocity(self) -> np.ndarray:
        """Second-order central differences, one-sided second order at the ends."""
        return np.gradient(self.values, self.dtau, edge_order=2)

    def acceleration(self) -> np.ndarray:
        x, h = self.values, self.dtau
        acc = np.empty_like(x)
        acc[1:-1] = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / h**2
        if x.size >= 4:
            acc[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) / h**2
            acc[-1] = (2.0 * x[-1] - 5.0 * x[-2] + 4.0 * x[-3] - x[-4]) / h**2
        else:
            acc[0] = acc[-1] = acc[1]
        return acc

    def with_values(self, values) -> "PathGrid":
        return PathGrid(self.tau0, self.dtau, values)


@dataclass(frozen=True)
class KernelMatrix:
    """Fluctuation operator on the interior lattice points (Dirichlet ends)."""

    matrix: np.ndarray
    dtau: float

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T)))

    def tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        """(diagonal, first off-diagonal) of a symmetric tridiagonal kernel."""
        return np.diag(self.matrix).copy(), np.diag(self.matrix, 1).copy()


def _checked_values(spec: ModelSpec, path: PathGrid) -> np.ndarray:
    spec.mass_at(path.values)
    return path.values


def lattice_action(spec: ModelSpec, path: PathGrid) -> float:
    """Discretized action whose exact Hessian is :func:`hessian_kernel`.

    Kinetic term on links with the link mass (m_i + m_{i+1})/2, potential on
    interior sites. Endpoint values are held fixed (Dirichlet), so the
    endpoint potential terms carry no fluctuation dependence and are omitted.
    """
    x = _checked_values(spec, path)
    h = path.dtau
    m = spec.mass(x)
    link_mass = 0.5 * (m[1:] + m[:-1])
    kinetic = np.sum(link_mass * np.diff(x) ** 2) / (2.0 * h)
    return float(kinetic + h * np.sum(spec.potential(x[1:-1])))


def lattice_gradient(spec: ModelSpec, path: PathGrid) -> np.ndarray:
    """dS/dX_i of :func:`lattice_action` at interior sites, divided by dtau.

    This is the lattice Euler-Lagrange residual; it tends to
    V' - m' Xdot^2 / 2 - m Xddot as dtau -> 0.
    """
    x = _checked_values(spec, path)
    h = path.dtau
    m = spec.mass(x)
    dm = np.broadcast_to(spec.mass.deriv(1)(x), x.shape)
    link_mass = 0.5 * (m[1:] + m[:-1])
    delta = np.diff(x)
    back, fwd = delta[:-1], delta[1:]
    grad = (
        dm[1:-1] * (back**2 + fwd**2) / (4.0 * h)
        + (link_mass[:-1] * back - link_mass[1:] * fwd) / h
        + h * np.broadcast_to(spec.potential.deriv(1)(x[1:-1]), back.shape)
    )
    return grad / h


def hessian_kernel(spec: ModelSpec, path: PathGrid) -> KernelMatrix:
    """Covariant second variation of the action around ``path``.

    Exact Hessian of :func:`lattice_action` (per unit dtau) minus the
    Christoffel term gamma(X_i) times the lattice Euler-Lagrange residual,
    which is kept off-shell. Second-order accurate discretization of
    -[m d^2 + m' Xdot d + m' Xddot + m'' Xdot^2 / 2 - V''] - gamma * residual.
    """
    x = _checked_values(spec, path)
    h = path.dtau
    m = spec.mass(x)
    dm = np.broadcast_to(spec.mass.deriv(1)(x), x.shape)
    d2m = np.broadcast_to(spec.mass.deriv(2)(x), x.shape)
    d2v = np.broadcast_to(spec.potential.deriv(2)(x[1:-1]), (x.size - 2,))
    link_mass = 0.5 * (m[1:] + m[:-1])
    delta = np.diff(x)
    back, fwd = delta[:-1], delta[1:]

    diag = (
        d2m[1:-1] * (back**2 + fwd**2) / (4.0 * h)
        + dm[1:-1] * (back - fwd) / h
        + (link_mass[:-1] + link_mass[1:]) / h
        + h * d2v
    )
    # link (i, i+1) between interior sites
    inner = slice(1, -1)
    off = (dm[1:-2] - dm[2:-1]) * delta[inner] / (2.0 * h) - link_mass[inner] / h

    gamma = np.broadcast_to(geometry(spec).gamma(x[1:-1]), diag.shape)
    residual = lattice_gradient(spec, path)
    n = diag.size
    mat = np.zeros((n, n))
    idx = np.arange(n)
    mat[idx, idx] = diag / h - gamma * residual
    mat[idx[:-1], idx[1:]] = off / h
    mat[idx[1:], idx[:-1]] = off / h
    return KernelMatrix(mat, h)


def transformed_kernel(spec: ModelSpec, path: PathGrid) -> KernelMatrix:
    """Einbein-flattened kernel -d^2/dtau^2 + Omega^2(X) (symmetric tridiagonal)."""
    x = _checked_values(spec, path)
    h = path.dtau
    w2 = np.broadcast_to(geometry(spec).omega_sq(x[1:-1]), (x.size - 2,))
    n = w2.size
    mat = np.zeros((n, n))
    idx = np.arange(n)
    mat[idx, idx] = 2.0 / h**2 + w2
    mat[idx[:-1], idx[1:]] = -1.0 / h**2
    mat[idx[1:], idx[:-1]] = -1.0 / h**2
    return KernelMatrix(mat, h)


def flatten_kernel(spec: ModelSpec, path: PathGrid, kernel: KernelMatrix) -> KernelMatrix:
    """Congruence e^{-1} K e^{-1} with the diagonal einbein matrix."""
    inv_e = 1.0 / np.sqrt(spec.mass(path.values[1:-1]))
    inv_e = np.broadcast_to(inv_e, (kernel.size,))
    return KernelMatrix(inv_e[:, None] * kernel.matrix * inv_e[None, :], kernel.dtau)
