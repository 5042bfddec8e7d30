"""One-loop derivative expansion: V1, Z1, the effective model and action values."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .covariant import PathGrid, geometry, omega_sq
from .errors import ConsistencyError, NonPositiveFrequencyError
from .model import Function1D, ModelSpec

Z1_FORM_RTOL = 1e-10


def require_positive_frequency(spec: ModelSpec, x):
    """Return Omega^2(x), raising NonPositiveFrequencyError where it is <= 0."""
    w2 = omega_sq(spec, x)
    bad = np.asarray(w2) <= 0
    if np.any(bad):
        arr = np.broadcast_to(np.asarray(x, dtype=float), np.shape(w2))
        where = float(arr if arr.ndim == 0 else arr[bad][0])
        raise NonPositiveFrequencyError(
            f"Omega^2 <= 0 at x={where!r}; the derivative expansion needs a real frequency", x=where
        )
    return w2


def v1(spec: ModelSpec, x):
    """One-loop effective potential V1 = Omega / 2."""
    return 0.5 * np.sqrt(require_positive_frequency(spec, x))


def z1(spec: ModelSpec, x):
    """One-loop kinetic coefficient Z1 = (Omega')^2 / (8 Omega^3).

    Also evaluates (d Omega^2/dx)^2 / (32 Omega^5) and raises
    ConsistencyError if the two disagree beyond 1e-10 relative.
    """
    require_positive_frequency(spec, x)
    geo = geometry(spec)
    a = geo.z1(x)
    b = geo.z1_alt(x)
    scale = np.maximum(np.abs(a), np.abs(b))
    if np.any(np.abs(a - b) > Z1_FORM_RTOL * scale):
        raise ConsistencyError("Z1 forms (Omega')^2/8Omega^3 and (Omega^2)'^2/32Omega^5 disagree")
    return a


@dataclass(frozen=True, eq=False)
class EffectiveModel(ModelSpec):
    """Mass and potential with their one-loop corrections.

    ``mass`` is m + hbar Z1 and ``potential`` is V + hbar Omega/2; the object
    can be used wherever a ModelSpec is accepted. ``source`` is the
    classical model.
    """

    source: ModelSpec = field(default=None, compare=False)

    @property
    def mass_eff(self) -> Function1D:
        return self.mass

    @property
    def potential_eff(self) -> Function1D:
        return self.potential

    def mass_at(self, x):
        require_positive_frequency(self.source, x)
        return super().mass_at(x)

    def mass_correction(self, x):
        return self.hbar * z1(self.source, x)

    def potential_correction(self, x):
        return self.hbar * v1(self.source, x)


def effective_model(spec: ModelSpec) -> EffectiveModel:
    """m_eff = m + hbar Z1, V_eff = V + hbar Omega / 2, as expression trees."""
    geo = geometry(spec)
    hbar = spec.hbar
    mass = ex.add(spec.mass.base, ex.mul(hbar, geo.z1.base))
    potential = ex.add(spec.potential.base, ex.mul(hbar * 0.5, geo.omega.base))
    return EffectiveModel(
        Function1D(mass),
        Function1D(potential),
        hbar,
        spec.domain,
        label=f"effective({spec.label})" if spec.label else "effective",
        source=spec,
    )


@dataclass(frozen=True)
class ActionValue:
    value: float
    horizon: float
    dtau: float


def _lagrangian_integral(spec: ModelSpec, path: PathGrid) -> float:
    x = path.values
    spec.mass_at(x)
    v = path.velocity()
    lagrangian = 0.5 * spec.mass(x) * v**2 + spec.potential(x)
    return float(np.trapezoid(lagrangian, dx=path.dtau))


def classical_action(spec: ModelSpec, path: PathGrid) -> ActionValue:
    """Trapezoid value of the integral of m(X) Xdot^2 / 2 + V(X) along ``path``."""
    return ActionValue(_lagrangian_integral(spec, path), path.horizon, path.dtau)


def effective_action(spec: ModelSpec, path: PathGrid) -> ActionValue:
    """Same quadrature as :func:`classical_action` with m_eff and V_eff."""
    require_positive_frequency(spec, path.values)
    return ActionValue(_lagrangian_integral(effective_model(spec), path), path.horizon, path.dtau)


@dataclass(frozen=True)
class AdiabaticityProfile:
    epsilon: np.ndarray
    max: float


def adiabaticity(spec: ModelSpec, path: PathGrid) -> AdiabaticityProfile:
    """eps(tau) = |dOmega/dtau| / Omega^2 with dOmega/dtau = Omega'(X) Xdot.

    The gradient expansion is trustworthy where max eps << 1.
    """
    return adiabaticity_from_velocity(spec, path.values, path.velocity())


def adiabaticity_from_velocity(spec: ModelSpec, x, xdot) -> AdiabaticityProfile:
    x = np.asarray(x, dtype=float)
    w2 = require_positive_frequency(spec, x)
    d_omega = geometry(spec).omega.deriv(1)(x)
    eps = np.broadcast_to(np.abs(d_omega * np.asarray(xdot)) / w2, x.shape)
    return AdiabaticityProfile(eps, float(np.max(eps)))
