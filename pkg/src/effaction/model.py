"""Model definition: the mass (metric) m(x), the potential V(x) and hbar."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import expr as ex
from .errors import DomainError, EvaluationError, NonPositiveMassError
from .parser import parse_expression


class Function1D:
    """A scalar function of one variable backed by an expression tree.

    Derivatives are structural and cached; ``f.deriv(k)`` is itself a
    ``Function1D`` so ``f.deriv(1).deriv(2)`` and ``f.deriv(3)`` agree.
    """

    def __init__(self, base: ex.Expr, text: str | None = None):
        if not isinstance(base, ex.Expr):
            raise TypeError(f"expected an Expr, got {type(base).__name__}")
        self.base = base
        self._text = text
        self._derivs: dict[int, Function1D] = {0: self}

    @classmethod
    def parse(cls, source: str, variable: str = "x") -> "Function1D":
        return cls(parse_expression(source, variable), text=source.strip())

    @classmethod
    def constant(cls, value: float) -> "Function1D":
        return cls(ex.Num(float(value)))

    @property
    def text(self) -> str:
        if self._text is None:
            self._text = ex.to_text(self.base)
        return self._text

    def __repr__(self):
        shown = self.text if len(self.text) <= 60 else self.text[:57] + "..."
        return f"Function1D({shown!r})"

    @cached_property
    def _compiled(self):
        return ex.compile_expr(self.base)

    def __call__(self, x):
        return self._compiled(x)

    def deriv(self, order: int = 1) -> "Function1D":
        if order < 0:
            raise ValueError(f"derivative order must be >= 0, got {order}")
        for k in range(1, order + 1):
            if k not in self._derivs:
                self._derivs[k] = Function1D(ex.differentiate(self._derivs[k - 1].base, 1))
        return self._derivs[order]

    def compose(self, inner: "Function1D") -> "Function1D":
        """The function x -> self(inner(x))."""
        return Function1D(ex.substitute(self.base, inner.base))


def _as_function(f) -> Function1D:
    if isinstance(f, Function1D):
        return f
    if isinstance(f, ex.Expr):
        return Function1D(f)
    if isinstance(f, str):
        return Function1D.parse(f)
    if isinstance(f, (int, float)):
        return Function1D.constant(f)
    raise TypeError(f"cannot make a Function1D from {type(f).__name__}")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Coordinate-dependent mass and potential on a closed interval.

    ``mass`` plays the role of the one-dimensional metric and must stay
    positive; ``domain`` is checked by every pointwise evaluation.
    """

    mass: Function1D
    potential: Function1D
    hbar: float = 1.0
    domain: tuple[float, float] = (-10.0, 10.0)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mass", _as_function(self.mass))
        object.__setattr__(self, "potential", _as_function(self.potential))
        lo, hi = (float(v) for v in self.domain)
        if not lo < hi:
            raise ValueError(f"domain must satisfy lo < hi, got {self.domain}")
        object.__setattr__(self, "domain", (lo, hi))
        if not np.isfinite(self.hbar) or self.hbar < 0:
            raise ValueError(f"hbar must be finite and non-negative, got {self.hbar}")
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def from_strings(cls, mass: str, potential: str, hbar: float = 1.0, domain=(-10.0, 10.0)) -> "ModelSpec":
        return cls(Function1D.parse(mass), Function1D.parse(potential), hbar, tuple(domain))

    def with_hbar(self, hbar: float) -> "ModelSpec":
        return ModelSpec(self.mass, self.potential, hbar, self.domain, self.label)

    def check_domain(self, x):
        """Raise DomainError unless every value of ``x`` lies in the domain."""
        arr = np.asarray(x, dtype=float)
        lo, hi = self.domain
        bad = ~((arr >= lo) & (arr <= hi))
        if np.any(bad):
            value = arr if arr.ndim == 0 else arr[bad][0]
            raise DomainError(f"x={float(value)!r} lies outside the domain [{lo}, {hi}]")

    def mass_at(self, x):
        """m(x) with domain and positivity checks."""
        self.check_domain(x)
        m = self.mass(x)
        if np.any(np.asarray(m) <= 0):
            arr = np.broadcast_to(np.asarray(x, dtype=float), np.shape(m))
            where = arr if arr.ndim == 0 else arr[np.asarray(m) <= 0][0]
            raise NonPositiveMassError(f"mass m(x) <= 0 at x={float(where)!r}")
        return m

    def sample_points(self, samples: int) -> np.ndarray:
        lo, hi = self.domain
        return np.linspace(lo, hi, samples)


@dataclass(frozen=True)
class ValidationReport:
    samples: int
    min_mass: float
    argmin_mass: float
    mass_positive: bool
    omega_sq_negative_count: int
    omega_sq_min: float
    omega_sq_signs: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.mass_positive

    def lines(self) -> list[str]:
        status = "PASS" if self.passed else "FAIL"
        out = [
            f"samples: {self.samples}",
            f"min mass: {self.min_mass:.17g} at x={self.argmin_mass:.17g}",
            f"mass positivity: {status}",
        ]
        if self.omega_sq_negative_count >= 0:
            out.append(
                f"omega^2 <= 0 at {self.omega_sq_negative_count} of {self.samples} points "
                f"(min omega^2 = {self.omega_sq_min:.17g}; advisory)"
            )
        else:
            out.append("omega^2: not evaluated (mass not positive)")
        return out


def validate_model(spec: ModelSpec, samples: int = 1001) -> ValidationReport:
    """Sweep the domain: metric positivity (pass/fail) and the sign of Omega^2 (advisory)."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    xs = spec.sample_points(samples)
    m = np.broadcast_to(spec.mass(xs), xs.shape)
    i = int(np.argmin(m))
    positive = bool(np.all(m > 0))
    if positive:
        from .covariant import omega_sq

        w2 = np.broadcast_to(omega_sq(spec, xs), xs.shape)
        signs = tuple(int(s) for s in np.sign(w2))
        neg_count = int(np.sum(w2 <= 0))
        w2_min = float(np.min(w2))
    else:
        signs, neg_count, w2_min = (), -1, float("nan")
    return ValidationReport(samples, float(m[i]), float(xs[i]), positive, neg_count, w2_min, signs)


__all__ = ["Function1D", "ModelSpec", "ValidationReport", "validate_model", "EvaluationError"]
