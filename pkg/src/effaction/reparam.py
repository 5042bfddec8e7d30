"""Coordinate transformations x = x(y) and executable covariance checks.

V and Omega^2 transform as scalars, m and Z1 as rank-2 tensors
(multiplied by x'(y)^2); the classical and effective actions are invariant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .covariant import PathGrid, geometry, omega_sq
from .effective import classical_action, effective_action, effective_model, v1
from .errors import DomainError, NonMonotoneMapError
from .model import Function1D, ModelSpec

SCALAR_TOL = 1e-9
TENSOR_TOL = 1e-9
ACTION_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CoordinateMap:
    """Strictly monotone map x = forward(y) on ``y_domain``."""

    forward: Function1D
    y_domain: tuple[float, float]
    samples: int = 2001
    direction: int = field(init=False)

    def __post_init__(self):
        if isinstance(self.forward, str):
            object.__setattr__(self, "forward", Function1D.parse(self.forward, variable="y"))
        lo, hi = (float(v) for v in self.y_domain)
        if not lo < hi:
            raise ValueError(f"y_domain must satisfy lo < hi, got {self.y_domain}")
        object.__setattr__(self, "y_domain", (lo, hi))
        ys = np.linspace(lo, hi, self.samples)
        slope = np.broadcast_to(self.forward.deriv(1)(ys), ys.shape)
        if np.any(np.abs(slope) <= 1e-12) or not (np.all(slope > 0) or np.all(slope < 0)):
            bad = ys[np.argmin(np.abs(slope))]
            raise NonMonotoneMapError(
                f"map is not strictly monotone on [{lo}, {hi}]: x'(y) vanishes or changes sign near y={bad:.6g}"
            )
        object.__setattr__(self, "direction", 1 if slope[0] > 0 else -1)

    @classmethod
    def parse(cls, source: str, y_domain, samples: int = 2001) -> "CoordinateMap":
        return cls(Function1D.parse(source, variable="y"), tuple(y_domain), samples)

    @classmethod
    def identity(cls, y_domain) -> "CoordinateMap":
        return cls(Function1D(ex.X), tuple(y_domain))

    def __call__(self, y):
        return self.forward(y)

    def jacobian(self, y):
        return self.forward.deriv(1)(y)

    @property
    def image(self) -> tuple[float, float]:
        a, b = (float(self.forward(v)) for v in self.y_domain)
        return (min(a, b), max(a, b))

    def inverse(self, x, iterations: int = 100):
        """y with forward(y) = x, by vectorized bisection on the monotone domain."""
        arr = np.asarray(x, dtype=float)
        lo_x, hi_x = self.image
        if np.any((arr < lo_x) | (arr > hi_x)):
            bad = arr[(arr < lo_x) | (arr > hi_x)] if arr.ndim else arr
            raise DomainError(f"x={float(np.ravel(bad)[0])!r} is outside the map image [{lo_x}, {hi_x}]")
        lo = np.full(arr.shape, self.y_domain[0])
        hi = np.full(arr.shape, self.y_domain[1])
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            above = (self.forward(mid) - arr) * self.direction > 0
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        out = 0.5 * (lo + hi)
        return float(out) if arr.ndim == 0 else out

    def compose(self, inner: "CoordinateMap") -> "CoordinateMap":
        """x = self(inner(z)), defined on inner's domain."""
        return CoordinateMap(self.forward.compose(inner.forward), inner.y_domain, self.samples)


def pushforward_model(spec: ModelSpec, cmap: CoordinateMap) -> ModelSpec:
    """The model in y coordinates: V~(y) = V(x(y)), m~(y) = m(x(y)) x'(y)^2."""
    lo, hi = cmap.image
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if lo < spec.domain[0] - slack or hi > spec.domain[1] + slack:
        raise DomainError(f"map image [{lo}, {hi}] is not inside the model domain {spec.domain}")
    jac = cmap.forward.deriv(1).base
    mass = ex.mul(ex.substitute(spec.mass.base, cmap.forward.base), ex.power(jac, 2))
    potential = ex.substitute(spec.potential.base, cmap.forward.base)
    label = f"{spec.label} in y" if spec.label else "pushforward"
    return ModelSpec(Function1D(mass), Function1D(potential), spec.hbar, cmap.y_domain, label)


def pushforward_path(path: PathGrid, cmap: CoordinateMap) -> PathGrid:
    """Pointwise y(tau_i) = x^{-1}(X(tau_i))."""
    return path.with_values(cmap.inverse(path.values))


@dataclass(frozen=True)
class CheckReport:
    name: str
    defects: dict
    tolerance: float

    @property
    def max_defect(self) -> float:
        return max(self.defects.values()) if self.defects else 0.0

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tolerance

    def line(self) -> str:
        parts = ", ".join(f"{k}={v:.3e}" for k, v in self.defects.items())
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: max defect {self.max_defect:.3e} (tol {self.tolerance:.0e}) {status} [{parts}]"


def relative_defect(a, b) -> float:
    """max |a - b| / max(|a|, |b|) with a floor of 1e-12 times the largest magnitude."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.abs(b))
    floor = 1e-12 * float(np.max(scale)) if scale.size else 0.0
    denom = np.maximum(scale, floor)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(denom > 0, np.abs(a - b) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(np.max(rel))


def _samples(cmap: CoordinateMap, samples: int):
    ys = np.linspace(*cmap.y_domain, samples)
    return ys, np.broadcast_to(cmap(ys), ys.shape)


def check_scalar(spec: ModelSpec, cmap: CoordinateMap, samples: int = 1001) -> CheckReport:
    """Omega^2 and V1 evaluated in both charts agree pointwise."""
    pushed = pushforward_model(spec, cmap)
    ys, xs = _samples(cmap, samples)
    w2_y = np.broadcast_to(omega_sq(pushed, ys), ys.shape)
    w2_x = np.broadcast_to(omega_sq(spec, xs), xs.shape)
    defects = {"omega_sq": relative_defect(w2_y, w2_x)}
    ok = (w2_x > 0) & (w2_y > 0)
    if np.any(ok):
        defects["v1"] = relative_defect(v1(pushed, ys[ok]), v1(spec, xs[ok]))
    return CheckReport("scalar", defects, SCALAR_TOL)


def check_tensor(spec: ModelSpec, cmap: CoordinateMap, samples: int = 1001) -> CheckReport:
    """m_eff and Z1 pick up the factor x'(y)^2."""
    pushed = pushforward_model(spec, cmap)
    ys, xs = _samples(cmap, samples)
    jac2 = np.broadcast_to(cmap.jacobian(ys), ys.shape) ** 2
    eff_y, eff_x = effective_model(pushed), effective_model(spec)
    m_y = eff_y.mass_at(ys)
    m_x = eff_x.mass_at(xs)
    z_y = geometry(pushed).z1(ys)
    z_x = geometry(spec).z1(xs)
    defects = {
        "mass": relative_defect(pushed.mass(ys), np.asarray(spec.mass(xs)) * jac2),
        "mass_eff": relative_defect(m_y, np.asarray(m_x) * jac2),
        "z1": relative_defect(z_y, np.asarray(z_x) * jac2),
    }
    return CheckReport("tensor", defects, TENSOR_TOL)


def check_action_invariance(spec: ModelSpec, cmap: CoordinateMap, path: PathGrid, hbar: float | None = None) -> CheckReport:
    """Classical and effective action values agree between the two charts."""
    if hbar is not None:
        spec = spec.with_hbar(hbar)
    pushed = pushforward_model(spec, cmap)
    ypath = pushforward_path(path, cmap)
    defects = {
        "classical": relative_defect(classical_action(spec, path).value, classical_action(pushed, ypath).value),
        "effective": relative_defect(effective_action(spec, path).value, effective_action(pushed, ypath).value),
    }
    return CheckReport("action", defects, ACTION_TOL)
