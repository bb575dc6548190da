"""Batch command-line surface.

Scene files are line oriented: ``flavor lattice|continuous``,
``horizon <T>``, ``rect <a> <b> <c> <d>`` (repeatable), ``particle <x> <y>``
(repeatable), ``#`` comments.  All randomized commands require an explicit
``--seed``; there is no time-derived default.  Output rows format floats by
shortest round-trip repr, so reruns with the same seed are byte-identical
for any ``--threads`` value.

Exit codes: 0 ok, 1 validation failure, 2 runtime error, 3 requested check
failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional, Sequence, TextIO

import numpy as np

from .bounds import BoundParams, higher_dim_noncollision_bound, nu_T0
from .dynamics import Scene, StepControl, run_batch
from .dynamics.reference import run_continuous_reference, run_lattice_reference
from .estimator import ctmc_oracle, fit_exponent, survival_curve, wilson_interval
from .geometry import Configuration, Rect
from .grouping import (
    ObstacleSet,
    composition_check,
    group_fixpoint,
    perimeter_inequality_check,
    shadow_preservation_check,
)
from .potential import (
    BarrierSpec,
    barrier_value,
    certify_subharmonic,
    pair_log_product,
    sample_configurations,
)
from .spectral import chain_matrix, spectrum_closed_form

__all__ = ["main", "parse_scene", "format_scene"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_CHECK_FAILED = 3


class SceneSyntaxError(ValueError):
    pass


def parse_scene(text: str, horizon_override: Optional[float] = None) -> Scene:
    """Parse and validate a scene file; raises with the offending line
    number on syntax errors and lists every violated hypothesis otherwise."""
    flavor = None
    horizon = math.inf
    rects: List[Rect] = []
    particles: List[tuple] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "flavor" and len(parts) == 2:
                if parts[1] not in ("lattice", "continuous"):
                    raise ValueError(f"unknown flavor {parts[1]!r}")
                flavor = parts[1]
            elif parts[0] == "horizon" and len(parts) == 2:
                horizon = float(parts[1])
            elif parts[0] == "rect" and len(parts) == 5:
                rects.append(Rect(*map(float, parts[1:])))
            elif parts[0] == "particle" and len(parts) == 3:
                particles.append((float(parts[1]), float(parts[2])))
            else:
                raise ValueError(f"unrecognized directive {parts[0]!r}")
        except ValueError as exc:
            raise SceneSyntaxError(f"line {lineno}: {exc}") from exc
    if flavor is None:
        raise SceneSyntaxError("missing 'flavor' directive")
    if len(particles) < 2:
        raise SceneSyntaxError("need at least two 'particle' directives")
    if horizon_override is not None:
        horizon = horizon_override
    scene = Scene(
        obstacles=ObstacleSet.of(rects),
        init=Configuration(np.array(particles, dtype=float), flavor),
        horizon=horizon,
    )
    errors = scene.validate()
    if errors:
        raise ValueError("invalid scene: " + "; ".join(errors))
    return scene


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_scene(scene: Scene) -> str:
    lines = [f"flavor {scene.flavor}", f"horizon {_fmt(float(scene.horizon))}"]
    for r in scene.obstacles:
        lines.append("rect " + " ".join(_fmt(float(v)) for v in r.as_tuple()))
    for x, y in scene.init.points:
        lines.append(f"particle {_fmt(float(x))} {_fmt(float(y))}")
    return "\n".join(lines) + "\n"


def _emit(out: TextIO, rows: Sequence[Sequence]) -> None:
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _step_from_args(args) -> StepControl:
    return StepControl(dt=args.dt, dt_min=args.dt_min, margin_guard=args.guard,
                       bridge=not args.no_bridge)


def _cmd_simulate(args, out: TextIO) -> int:
    scene = parse_scene(open(args.scene, encoding="utf-8").read(), args.t)
    if args.dump is not None:
        runner = run_lattice_reference if scene.flavor == "lattice" else run_continuous_reference
        kwargs = {} if scene.flavor == "lattice" else dict(
            dt=args.dt, dt_min=args.dt_min, margin_guard=args.guard, bridge=not args.no_bridge)
        record, trajectory = runner(scene, args.seed, replica=args.replica,
                                    record=True, **kwargs)
        _emit(out, [("t", "particle_id", "x", "y")])
        _emit(out, [(e.t, e.particle, e.x, e.y) for e in trajectory])
        return EXIT_OK
    batch = run_batch(scene, args.n_replicas, args.seed,
                      step=_step_from_args(args), threads=args.threads)
    _emit(out, [("replica", "status", "collided", "collision_time", "t_end",
                 "event_count", "max_elongation")])
    rows = []
    for r in range(batch.n_replicas):
        rec = batch.record(r)
        rows.append((rec.replica, rec.status, rec.collided,
                     math.nan if rec.collision_time is None else rec.collision_time,
                     rec.t_end, rec.event_count, rec.max_elongation))
    _emit(out, rows)
    return EXIT_OK


def _cmd_estimate(args, out: TextIO) -> int:
    scene = parse_scene(open(args.scene, encoding="utf-8").read(), args.t)
    if math.isinf(scene.horizon):
        raise ValueError("estimate needs a finite horizon (scene file or --t)")
    estimates = survival_curve(scene, [scene.horizon], args.n_replicas, args.seed,
                               step=_step_from_args(args), threads=args.threads)
    _emit(out, [("T", "N", "survivors", "p_hat", "ci_low", "ci_high", "seed")])
    _emit(out, [(e.T, e.n_replicas, e.survivors, e.p_hat, e.ci_low, e.ci_high,
                 e.master_seed) for e in estimates])
    return EXIT_OK


def _cmd_fit(args, out: TextIO) -> int:
    scene = parse_scene(open(args.scene, encoding="utf-8").read())
    grid = [float(v) for v in args.grid.split(",")]
    fit = fit_exponent(scene, grid, args.n_replicas, args.seed,
                       step=_step_from_args(args), threads=args.threads)
    _emit(out, [("T", "lnlnT", "ln_phat", "weight")])
    _emit(out, list(zip(fit.grid, fit.lnln_t, fit.ln_p, fit.weights)))
    out.write(f"# slope={_fmt(fit.slope)} stderr={_fmt(fit.stderr)} nu_hat={_fmt(fit.nu_hat)}\n")
    return EXIT_OK


def _cmd_spectrum(args, out: TextIO) -> int:
    closed = spectrum_closed_form(args.n)
    numeric = np.linalg.eigvalsh(chain_matrix(args.n))
    _emit(out, [("k", "closed_form", "numeric", "abs_err")])
    worst = 0.0
    rows = []
    for k in range(args.n):
        err = abs(closed[k] - numeric[k])
        worst = max(worst, err)
        rows.append((k, closed[k], numeric[k], err))
    _emit(out, rows)
    return EXIT_OK if worst < 1e-10 else EXIT_CHECK_FAILED


def _cmd_certify(args, out: TextIO) -> int:
    samples = sample_configurations(args.n, args.samples, min_clearance=2.0,
                                    box=args.box, seed=args.seed)
    if args.function == "barrier":
        spec = BarrierSpec(args.n, gamma=args.gamma)
        field = lambda pts: barrier_value(spec, Configuration(pts, "continuous"))  # noqa: E731
    else:
        field = lambda pts: pair_log_product(Configuration(pts, "continuous"))  # noqa: E731
    report = certify_subharmonic(field, samples, h=args.step, tol=args.tol)
    _emit(out, [("sample_id", "g_value", "fd_laplacian", "violation_flag")])
    _emit(out, [(i, report.values[i], report.laplacians[i], i in set(report.violations))
                for i in range(report.n_samples)])
    return EXIT_OK


def _cmd_group(args, out: TextIO) -> int:
    scene = parse_scene(open(args.scene, encoding="utf-8").read())
    S = scene.obstacles
    g = group_fixpoint(S, args.sigma)
    sigma2 = args.sigma_prime if args.sigma_prime is not None else args.sigma
    checks = {
        "perimeter_inequality": perimeter_inequality_check(S, args.sigma),
        "shadow_preservation": shadow_preservation_check(S, args.sigma, sigma2),
        "composition": composition_check(S, args.sigma, sigma2),
    }
    _emit(out, [("record", "a", "b", "c", "d")])
    _emit(out, [("rect",) + r.as_tuple() for r in g])
    _emit(out, [("check_" + name, ok, "", "", "") for name, ok in checks.items()])
    return EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED


def _cmd_bound(args, out: TextIO) -> int:
    params = BoundParams(n=args.n, p=args.p, c0=args.c0, flavor=args.flavor)
    nu, t0 = nu_T0(params)
    header = ["n", "p", "c0", "flavor", "nu", "T0"]
    row = [args.n, args.p, args.c0, args.flavor, nu, t0]
    if args.dim is not None:
        if args.a is None:
            raise ValueError("--dim needs --a")
        header.append("higher_dim_bound")
        row.append(higher_dim_noncollision_bound(args.a, args.dim, args.n))
    _emit(out, [header, row])
    return EXIT_OK


def _cmd_oracle(args, out: TextIO) -> int:
    scene = parse_scene(open(args.scene, encoding="utf-8").read(), args.t)
    result = ctmc_oracle(scene, radius=args.radius)
    _emit(out, [("T", "value", "leak", "tail", "n_states", "radius")])
    _emit(out, [(scene.horizon, result.value, result.leak, result.tail,
                 result.n_states, result.radius)])
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nocollide",
        description="non-collision probability toolkit: simulation, estimation and checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seeded=True, scened=True):
        if scened:
            p.add_argument("--scene", required=True, help="scene file path")
        if seeded:
            p.add_argument("--seed", type=int, required=True,
                           help="master seed (required: runs are reproducible)")
        p.add_argument("--out", default=None, help="output CSV path (default stdout)")
        p.add_argument("--threads", type=int, default=None)

    def add_step(p):
        p.add_argument("--dt", type=float, default=1e-2)
        p.add_argument("--dt-min", dest="dt_min", type=float, default=1e-6)
        p.add_argument("--guard", type=float, default=0.25)
        p.add_argument("--no-bridge", action="store_true")

    p = sub.add_parser("simulate", help="run replicas, one CSV row each")
    add_common(p)
    add_step(p)
    p.add_argument("--n-replicas", type=int, default=1)
    p.add_argument("--t", type=float, default=None, help="horizon override")
    p.add_argument("--dump", default=None, help="write a trajectory CSV for one replica")
    p.add_argument("--replica", type=int, default=0)

    p = sub.add_parser("estimate", help="survival probability with Wilson interval")
    add_common(p)
    add_step(p)
    p.add_argument("--n-replicas", type=int, required=True)
    p.add_argument("--t", type=float, default=None, help="horizon override")

    p = sub.add_parser("fit", help="survival-exponent regression on a horizon grid")
    add_common(p)
    add_step(p)
    p.add_argument("--n-replicas", type=int, required=True)
    p.add_argument("--grid", required=True, help="comma-separated horizons")

    p = sub.add_parser("spectrum", help="closed-form vs numeric chain-matrix spectrum")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("certify", help="finite-difference subharmonicity check")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--function", choices=("barrier", "pairs"), default="barrier")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--box", type=float, default=10.0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("group", help="obstacle grouping and its invariants")
    p.add_argument("--scene", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--sigma-prime", dest="sigma_prime", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bound", help="closed-form bound parameters")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--c0", type=float, required=True)
    p.add_argument("--flavor", choices=("discrete", "continuous"), default="continuous")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("oracle", help="exact two-particle lattice survival")
    p.add_argument("--scene", required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--radius", type=int, default=12)
    p.add_argument("--out", default=None)

    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "fit": _cmd_fit,
    "spectrum": _cmd_spectrum,
    "certify": _cmd_certify,
    "group": _cmd_group,
    "bound": _cmd_bound,
    "oracle": _cmd_oracle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out, should_close = _open_out(getattr(args, "out", None))
    try:
        return _COMMANDS[args.command](args, out)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        if should_close:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
