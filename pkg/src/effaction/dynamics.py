"""Euclidean equations of motion of the classical and the effective action."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .effective import EffectiveModel, effective_model, require_positive_frequency
from .errors import DomainExitError, EvaluationError, NonPositiveMassError
from .model import ModelSpec


@dataclass(frozen=True)
class OrbitState:
    tau: float
    x: float
    xdot: float


def el_rhs(model: ModelSpec, x, xdot):
    """Euclidean acceleration [V'(x) - m'(x) xdot^2 / 2] / m(x).

    The potential force enters with a plus sign: orbits grow like cosh.
    """
    m = model.mass(x)
    if np.any(np.asarray(m) <= 0):
        raise NonPositiveMassError(f"mass m(x) <= 0 at x={x!r}")
    return (model.potential.deriv(1)(x) - 0.5 * model.mass.deriv(1)(x) * xdot**2) / m


@dataclass(frozen=True, eq=False)
class Trajectory:
    tau0: float
    dtau: float
    x: np.ndarray
    xdot: np.ndarray
    used_effective: bool
    model: ModelSpec

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def times(self) -> np.ndarray:
        return self.tau0 + self.dtau * np.arange(self.n)

    def states(self) -> list[OrbitState]:
        return [OrbitState(float(t), float(a), float(b)) for t, a, b in zip(self.times, self.x, self.xdot)]

    def residuals(self) -> np.ndarray:
        """Euler-Lagrange residual at interior states with xddot from the five-point stencil.

        The stencil is fourth order, so for a fourth-order integrator the
        residual is O(dtau^4). Defined for indices 2 .. n-3.
        """
        x, h = self.x, self.dtau
        if x.size < 5:
            return np.empty(0)
        xddot = (-x[4:] + 16.0 * x[3:-1] - 30.0 * x[2:-2] + 16.0 * x[1:-3] - x[:-4]) / (12.0 * h * h)
        xc, vc = x[2:-2], self.xdot[2:-2]
        m = self.model
        return m.potential.deriv(1)(xc) - 0.5 * m.mass.deriv(1)(xc) * vc**2 - m.mass(xc) * xddot

    def residual_constant(self) -> float:
        """C in max |residual| <= C dtau^4."""
        res = self.residuals()
        return float(np.max(np.abs(res)) / self.dtau**4) if res.size else 0.0

    def energy(self) -> np.ndarray:
        """Euclidean first integral m xdot^2 / 2 - V, constant along exact orbits."""
        return 0.5 * self.model.mass(self.x) * self.xdot**2 - self.model.potential(self.x)


def _rhs_checked(model, x, v):
    try:
        return el_rhs(model, x, v)
    except EvaluationError:
        if isinstance(model, EffectiveModel):
            require_positive_frequency(model.source, x)
        raise


def integrate_orbit(model: ModelSpec, start: OrbitState, T: float, dtau: float) -> Trajectory:
    """Fixed-step RK4 integration of (x, xdot) over [start.tau, start.tau + T].

    Leaving the domain raises DomainExitError carrying the partial
    trajectory and the time of the first out-of-domain state.
    """
    if not dtau > 0:
        raise ValueError(f"dtau must be positive, got {dtau}")
    if not T >= dtau:
        raise ValueError(f"T must be at least dtau, got T={T}, dtau={dtau}")
    steps = int(math.floor(T / dtau + 1e-9))
    model.mass_at(start.x)
    lo, hi = model.domain
    effective = isinstance(model, EffectiveModel)

    xs = np.empty(steps + 1)
    vs = np.empty(steps + 1)
    x, v = float(start.x), float(start.xdot)
    xs[0], vs[0] = x, v
    h = dtau
    for i in range(steps):
        a1 = _rhs_checked(model, x, v)
        x2, v2 = x + 0.5 * h * v, v + 0.5 * h * a1
        a2 = _rhs_checked(model, x2, v2)
        x3, v3 = x + 0.5 * h * v2, v + 0.5 * h * a2
        a3 = _rhs_checked(model, x3, v3)
        x4, v4 = x + h * v3, v + h * a3
        a4 = _rhs_checked(model, x4, v4)
        x = x + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v = v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        if not (lo <= x <= hi) or not math.isfinite(v):
            partial = Trajectory(start.tau, dtau, xs[: i + 1].copy(), vs[: i + 1].copy(), effective, model)
            tau_exit = start.tau + (i + 1) * dtau
            raise DomainExitError(f"orbit left the domain [{lo}, {hi}] at tau={tau_exit:.17g}", tau_exit, partial)
        xs[i + 1], vs[i + 1] = x, v
    return Trajectory(start.tau, dtau, xs, vs, effective, model)


@dataclass(frozen=True, eq=False)
class QuantumShift:
    classical: Trajectory
    effective: Trajectory
    max_deviation: float


def quantum_shift(spec: ModelSpec, start: OrbitState, T: float, dtau: float) -> QuantumShift:
    """Integrate the same initial state under the classical and the effective equations."""
    require_positive_frequency(spec, start.x)
    classical = integrate_orbit(spec, start, T, dtau)
    require_positive_frequency(spec, classical.x)
    quantum = integrate_orbit(effective_model(spec), start, T, dtau)
    require_positive_frequency(spec, quantum.x)
    return QuantumShift(classical, quantum, float(np.max(np.abs(quantum.x - classical.x))))
