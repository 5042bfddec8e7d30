"""Run configuration files.

An INI-style file with section headers and ``key = value`` lines.
Expressions are quoted strings in the model grammar; lists are comma
separated. Comments start with ``#`` or ``;``. Example::

    [model]
    mass = "1 + x^2"
    potential = "0.5*x^2"
    hbar = 1
    domain = -5, 5

    [grid]
    T = 20
    N = 2001

    [sweep]
    lo = -2
    hi = 2
    points = 41

    [bump]
    center = 0
    amplitude = 1
    epsilon = 0.05, 0.1, 0.2     ; or: s = 0.1, 0.2
    horizon_scale = 50

    [orbit]
    x0 = 0.5
    xdot0 = 0.3
    T = 2
    dtau = 0.01

    [reparam]
    map = "sinh(y)"
    y_domain = -2.3, 2.3
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError, ExpressionError
from .model import Function1D, ModelSpec

KNOWN_SECTIONS = {
    "model": {"mass", "potential", "hbar", "domain"},
    "grid": {"t", "n"},
    "sweep": {"lo", "hi", "points"},
    "bump": {"center", "amplitude", "s", "epsilon", "horizon_scale", "points"},
    "orbit": {"x0", "xdot0", "t", "dtau", "tau0"},
    "reparam": {"map", "y_domain", "samples", "path_center", "path_amplitude", "path_rate"},
}


@dataclass(frozen=True)
class SweepConfig:
    lo: float
    hi: float
    points: int


@dataclass(frozen=True)
class BumpConfig:
    center: float
    amplitude: float
    s: tuple[float, ...] | None
    epsilon: tuple[float, ...] | None
    horizon_scale: float
    points: int | None


@dataclass(frozen=True)
class OrbitConfig:
    x0: float
    xdot0: float
    T: float
    dtau: float
    tau0: float = 0.0


@dataclass(frozen=True)
class ReparamConfig:
    map_expr: str
    y_domain: tuple[float, float]
    samples: int
    path_center: float
    path_amplitude: float
    path_rate: float


@dataclass(frozen=True)
class RunConfig:
    mass_expr: str
    potential_expr: str
    hbar: float
    domain: tuple[float, float]
    grid_T: float = 20.0
    grid_N: int = 2001
    sweep: SweepConfig | None = None
    bump: BumpConfig | None = None
    orbit: OrbitConfig | None = None
    reparam: ReparamConfig | None = None

    def model(self) -> ModelSpec:
        fns = {}
        for key, source in (("mass", self.mass_expr), ("potential", self.potential_expr)):
            try:
                fns[key] = Function1D.parse(source)
            except ExpressionError as exc:
                raise ConfigError(str(exc), f"model.{key}") from None
        return ModelSpec(fns["mass"], fns["potential"], self.hbar, self.domain)

    def override(self, hbar: float | None = None, grid_n: int | None = None) -> "RunConfig":
        out = self
        if hbar is not None:
            if hbar < 0:
                raise ConfigError("must be non-negative", "--hbar")
            out = replace(out, hbar=float(hbar))
        if grid_n is not None:
            if grid_n < 16:
                raise ConfigError("must be >= 16", "--grid-n")
            out = replace(out, grid_N=int(grid_n))
        return out


class _Section:
    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.data = parser[name] if parser.has_section(name) else None

    def __bool__(self):
        return self.data is not None

    def raw(self, key, default=None, required=False):
        if self.data is None or key not in self.data:
            if required:
                raise ConfigError("missing required field", f"{self.name}.{key}")
            return default
        return self.data[key].strip()

    def _convert(self, key, conv, default, required):
        text = self.raw(key, None, required)
        if text is None:
            return default
        try:
            return conv(text)
        except ValueError:
            raise ConfigError(f"cannot read {text!r} as {conv.__name__}", f"{self.name}.{key}") from None

    def text(self, key, default=None, required=False):
        value = self.raw(key, default, required)
        if value is not None and len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        return value

    def real(self, key, default=None, required=False):
        return self._convert(key, float, default, required)

    def integer(self, key, default=None, required=False):
        return self._convert(key, int, default, required)

    def reals(self, key, default=None, required=False):
        def floats(text):
            return tuple(float(v) for v in text.split(",") if v.strip())

        return self._convert(key, floats, default, required)

    def interval(self, key, default=None, required=False):
        value = self.reals(key, default, required)
        if value is None:
            return None
        if len(value) != 2 or not value[0] < value[1]:
            raise ConfigError("expected 'lo, hi' with lo < hi", f"{self.name}.{key}")
        return (value[0], value[1])


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0]) from None

    for name in parser.sections():
        if name not in KNOWN_SECTIONS:
            raise ConfigError("unknown section", name)
        for key in parser[name]:
            if key not in KNOWN_SECTIONS[name]:
                raise ConfigError("unknown field", f"{name}.{key}")

    model = _Section(parser, "model")
    if not model:
        raise ConfigError("missing section", "model")
    hbar = model.real("hbar", 1.0)
    if hbar < 0:
        raise ConfigError("must be non-negative", "model.hbar")
    cfg = dict(
        mass_expr=model.text("mass", required=True),
        potential_expr=model.text("potential", required=True),
        hbar=hbar,
        domain=model.interval("domain", required=True),
    )

    grid = _Section(parser, "grid")
    cfg["grid_T"] = grid.real("t", 20.0)
    cfg["grid_N"] = grid.integer("n", 2001)
    if not cfg["grid_T"] > 0:
        raise ConfigError("must be positive", "grid.T")
    if cfg["grid_N"] < 16:
        raise ConfigError("must be >= 16", "grid.N")

    sweep = _Section(parser, "sweep")
    if sweep:
        points = sweep.integer("points", 41)
        if points < 2:
            raise ConfigError("must be >= 2", "sweep.points")
        lo, hi = sweep.real("lo", required=True), sweep.real("hi", required=True)
        if not lo <= hi:
            raise ConfigError("sweep.lo must not exceed sweep.hi", "sweep.hi")
        cfg["sweep"] = SweepConfig(lo, hi, points)

    bump = _Section(parser, "bump")
    if bump:
        s = bump.reals("s")
        eps = bump.reals("epsilon")
        if (s is None) == (eps is None):
            raise ConfigError("give exactly one of 's' or 'epsilon'", "bump")
        for key, values in (("s", s), ("epsilon", eps)):
            if values is not None and (not values or any(v <= 0 for v in values)):
                raise ConfigError("values must be positive", f"bump.{key}")
        cfg["bump"] = BumpConfig(
            center=bump.real("center", 0.0),
            amplitude=bump.real("amplitude", required=True),
            s=s,
            epsilon=eps,
            horizon_scale=bump.real("horizon_scale", 50.0),
            points=bump.integer("points"),
        )

    orbit = _Section(parser, "orbit")
    if orbit:
        oc = OrbitConfig(
            x0=orbit.real("x0", required=True),
            xdot0=orbit.real("xdot0", 0.0),
            T=orbit.real("t", required=True),
            dtau=orbit.real("dtau", 0.01),
            tau0=orbit.real("tau0", 0.0),
        )
        if not oc.dtau > 0:
            raise ConfigError("must be positive", "orbit.dtau")
        if not oc.T >= oc.dtau:
            raise ConfigError("must be at least orbit.dtau", "orbit.T")
        cfg["orbit"] = oc

    rep = _Section(parser, "reparam")
    if rep:
        map_expr = rep.text("map", required=True)
        if map_expr.replace(" ", "").startswith("x="):
            map_expr = map_expr.split("=", 1)[1].strip()
        cfg["reparam"] = ReparamConfig(
            map_expr=map_expr,
            y_domain=rep.interval("y_domain", required=True),
            samples=rep.integer("samples", 1001),
            path_center=rep.real("path_center", 0.0),
            path_amplitude=rep.real("path_amplitude", 1.0),
            path_rate=rep.real("path_rate", 0.5),
        )
    return RunConfig(**cfg)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc.strerror}", str(path)) from None
    return parse_config(text, str(path))
