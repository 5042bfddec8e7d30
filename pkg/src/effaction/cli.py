"""Command-line front end.

    effaction <eval|tracelog|reparam|evolve|validate> --config FILE
              [--out FILE] [--hbar H] [--grid-n N]

Exit codes: 0 success, 1 configuration error, 2 numeric-domain error
(non-positive frequency or mass, domain exit), 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from contextlib import contextmanager

import numpy as np

from .config import RunConfig, load_config
from .covariant import geometry, omega_sq
from .dynamics import OrbitState, integrate_orbit
from .effective import adiabaticity_from_velocity, effective_model, require_positive_frequency, v1, z1
from .errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    DomainExitError,
    EvaluationError,
    ExpressionError,
    NonMonotoneMapError,
    NonPositiveFrequencyError,
    NonPositiveMassError,
    NotPositiveDefiniteError,
)
from .model import validate_model
from .reparam import CoordinateMap, check_action_invariance, check_scalar, check_tensor
from .tracelog import bump_path, compare_bump, loglog_slope, s_for_epsilon

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INTERNAL = 0, 1, 2, 3


class _Output:
    """CSV sink plus a summary stream that never mixes with CSV on stdout."""

    def __init__(self, path):
        self.path = path
        self.rows: list[str] = []

    def row(self, values):
        self.rows.append(",".join(fmt(v) for v in values))

    def footer(self, key, value):
        self.rows.append(f"# {key},{fmt(value)}")

    def flush(self):
        text = "".join(r + "\n" for r in self.rows)
        if self.path is None:
            sys.stdout.write(text)
        else:
            with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)

    @property
    def summary(self):
        return sys.stderr if self.path is None else sys.stdout


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def cmd_eval(cfg: RunConfig, out: _Output) -> int:
    if cfg.sweep is None:
        raise ConfigError("missing section (needed by 'eval')", "sweep")
    spec = cfg.model()
    xs = np.linspace(cfg.sweep.lo, cfg.sweep.hi, cfg.sweep.points)
    m = np.broadcast_to(spec.mass_at(xs), xs.shape)
    pot = np.broadcast_to(spec.potential(xs), xs.shape)
    geo = geometry(spec)
    gamma = np.broadcast_to(geo.gamma(xs), xs.shape)
    w2 = np.broadcast_to(omega_sq(spec, xs), xs.shape)
    ok = w2 > 0
    cols = {name: np.full(xs.shape, np.nan) for name in ("v1", "z1", "m_eff", "v_eff")}
    if np.any(ok):
        cols["v1"][ok] = v1(spec, xs[ok])
        cols["z1"][ok] = z1(spec, xs[ok])
        eff = effective_model(spec)
        cols["m_eff"][ok] = eff.mass_at(xs[ok])
        cols["v_eff"][ok] = eff.potential(xs[ok])
    out.row(["x", "m", "V", "gamma", "omega_sq", "V1", "Z1", "m_eff", "V_eff"])
    for i, x in enumerate(xs):
        out.row([x, m[i], pot[i], gamma[i], w2[i], cols["v1"][i], cols["z1"][i], cols["m_eff"][i], cols["v_eff"][i]])
    out.footer("nonpositive_omega_sq_rows", int(np.sum(~ok)))
    out.flush()
    return EXIT_OK


def cmd_tracelog(cfg: RunConfig, out: _Output) -> int:
    bump = cfg.bump
    if bump is None:
        raise ConfigError("missing section (needed by 'tracelog')", "bump")
    spec = cfg.model()
    if bump.s is not None:
        rates = list(bump.s)
    else:
        if bump.amplitude == 0:
            raise ConfigError("epsilon targets need a non-zero amplitude", "bump.amplitude")
        rates = [s_for_epsilon(spec, bump.center, bump.amplitude, e) for e in bump.epsilon]
    n = bump.points if bump.points is not None else cfg.grid_N
    results = [compare_bump(spec, bump.center, bump.amplitude, s, bump.horizon_scale, n) for s in rates]

    out.row(["s", "max_epsilon", "gamma1_numeric", "gamma1_eigen", "gamma1_expansion",
             "gamma1_expansion_no_Z1", "rel_error", "rel_error_no_Z1"])
    for r in results:
        out.row([r.s, r.max_epsilon, r.gamma1_numeric, r.gamma1_eigen, r.gamma1_expansion,
                 r.gamma1_expansion_no_z1, r.rel_error, r.rel_error_no_z1])
    out.flush()

    eps = [r.max_epsilon for r in results]
    lines = [f"tracelog: {len(results)} bump(s), center={bump.center:g}, amplitude={bump.amplitude:g}, points={n}"]
    usable = [r for r in results if r.max_epsilon > 0 and r.rel_error > 0 and r.rel_error_no_z1 > 0]
    if len(usable) >= 2:
        e = [r.max_epsilon for r in usable]
        lines.append(f"log-log slope of rel_error vs max_epsilon: {loglog_slope(e, [r.rel_error for r in usable]):.4f}")
        lines.append(
            "log-log slope of rel_error_no_Z1 vs max_epsilon: "
            f"{loglog_slope(e, [r.rel_error_no_z1 for r in usable]):.4f}"
        )
    else:
        lines.append("log-log slope: n/a (needs two bumps with non-zero errors)")
    if results and results[-1].rel_error > 0:
        top = max(results, key=lambda r: r.s)
        lines.append(f"rel_error_no_Z1 / rel_error at largest s: {top.rel_error_no_z1 / top.rel_error:.4f}")
    omega0 = math.sqrt(require_positive_frequency(spec, bump.center))
    boundary = min(omega0 * bump.horizon_scale / s for s in rates)
    lines.append(f"boundary influence: Omega*T at the ends >= {boundary:.4g} (exp(-2*Omega*T) = {math.exp(-2 * boundary):.3g})")
    if eps and max(eps) > 0.3:
        lines.append(f"warning: max epsilon {max(eps):.3g} is not small; the gradient expansion is unreliable")
    print("\n".join(lines), file=out.summary)
    return EXIT_OK


def cmd_reparam(cfg: RunConfig, out: _Output) -> int:
    rep = cfg.reparam
    if rep is None:
        raise ConfigError("missing section (needed by 'reparam')", "reparam")
    spec = cfg.model()
    try:
        cmap = CoordinateMap.parse(rep.map_expr, rep.y_domain)
    except ExpressionError as exc:
        raise ConfigError(str(exc), "reparam.map") from None
    path = bump_path(rep.path_center, rep.path_amplitude, rep.path_rate, cfg.grid_T, cfg.grid_N)
    reports = [
        check_scalar(spec, cmap, rep.samples),
        check_tensor(spec, cmap, rep.samples),
        check_action_invariance(spec, cmap, path),
    ]
    lines = [f"reparam: x = {rep.map_expr} on y in [{rep.y_domain[0]:g}, {rep.y_domain[1]:g}]"]
    lines += [r.line() for r in reports]
    passed = all(r.passed for r in reports)
    lines.append("overall: PASS" if passed else "overall: FAIL")
    text = "\n".join(lines) + "\n"
    if out.path is None:
        sys.stdout.write(text)
    else:
        with open(out.path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK if passed else EXIT_INTERNAL


def cmd_evolve(cfg: RunConfig, out: _Output) -> int:
    orbit = cfg.orbit
    if orbit is None:
        raise ConfigError("missing section (needed by 'evolve')", "orbit")
    spec = cfg.model()
    start = OrbitState(orbit.tau0, orbit.x0, orbit.xdot0)
    require_positive_frequency(spec, start.x)
    trajectories, exits = [], []
    for model in (spec, effective_model(spec)):
        try:
            trajectories.append(integrate_orbit(model, start, orbit.T, orbit.dtau))
        except DomainExitError as exc:
            trajectories.append(exc.trajectory)
            exits.append(exc.tau)
    classical, quantum = trajectories
    n = min(classical.n, quantum.n)
    delta = np.abs(quantum.x[:n] - classical.x[:n])
    out.row(["tau", "x_classical", "x_effective", "delta"])
    for i in range(n):
        out.row([classical.times[i], classical.x[i], quantum.x[i], delta[i]])
    out.footer("max_delta", float(np.max(delta)))
    eps = adiabaticity_from_velocity(spec, classical.x, classical.xdot)
    out.footer("max_epsilon_classical", eps.max)
    if exits:
        out.footer("domain_exit_tau", min(exits))
    out.flush()
    if exits:
        print(f"evolve: orbit left the domain at tau={min(exits):.17g}; output truncated", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_validate(cfg: RunConfig, out: _Output) -> int:
    report = validate_model(cfg.model(), cfg.grid_N)
    text = "\n".join(report.lines()) + "\n"
    if out.path is None:
        sys.stdout.write(text)
    else:
        with open(out.path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK if report.passed else EXIT_NUMERIC


COMMANDS = {
    "eval": cmd_eval,
    "tracelog": cmd_tracelog,
    "reparam": cmd_reparam,
    "evolve": cmd_evolve,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effaction",
        description="One-loop covariant effective action for a particle with coordinate-dependent mass.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--hbar", type=float, help="override model.hbar")
    parser.add_argument("--grid-n", type=int, help="override grid.N")
    return parser


@contextmanager
def _quiet_numpy():
    with np.errstate(all="ignore"):
        yield


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).override(args.hbar, args.grid_n)
        with _quiet_numpy():
            return COMMANDS[args.command](cfg, _Output(args.out))
    except (ConfigError, ExpressionError, NonMonotoneMapError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        NonPositiveFrequencyError,
        NonPositiveMassError,
        NotPositiveDefiniteError,
        DomainError,
        DomainExitError,
        EvaluationError,
    ) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConsistencyError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
