"""Command line entry point: ``liyau {check,derivatives,sweep,probe,selftest}``.

Exit codes: 0 success, 1 an inequality that a theorem guarantees failed its
tolerance, 2 bad input, 3 numerical engine failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

from .errors import InputError, NumericalError
from .inequalities import (
    AGGREGATES,
    FourthOrderParams,
    admissible_fourth,
    moments,
)
from .initial_data import InitialData, dumps_scenario, load_scenario
from .kernel_moments import finite_difference_ratios, ratios_from_moments
from .probe import (
    FOURTH_PARAMS,
    SECOND_PARAMS,
    SweepSpec,
    evaluate,
    make_family,
    minimal_slack_report,
    minimize_slack,
    sweep,
    sweep_csv,
)
from .quadrature import QuadratureSpec

SCHEMA = "liyau-report/1"
EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
PROBE_TOL = 1e-8

log = logging.getLogger("liyau")


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _parse_points(raw: list[list[str]] | None) -> list[tuple[float, ...]]:
    """Each ``--x`` occurrence is one point; coordinates split on spaces or commas."""
    if not raw:
        raise InputError("at least one --x point is required")
    points = []
    for tokens in raw:
        coords = [c for tok in tokens for c in tok.split(",") if c.strip()]
        try:
            points.append(tuple(float(c) for c in coords))
        except ValueError as exc:
            raise InputError(f"bad point {tokens!r}") from exc
    return points


def _parse_grid(items: list[str]) -> dict[str, tuple[float, float, int]]:
    grid = {}
    for item in items or []:
        try:
            name, rng = item.split("=", 1)
            lo, hi, steps = rng.split(":")
            grid[name.strip()] = (float(lo), float(hi), int(steps))
        except ValueError as exc:
            raise InputError(f"bad --grid {item!r}; expected NAME=LO:HI:STEPS") from exc
    return grid


def _quadrature(args) -> QuadratureSpec | None:
    engine = args.quad_engine.replace("-", "_")
    if engine == "closed_form":
        return None
    return QuadratureSpec(
        engine=engine,
        order_per_axis=args.quad_order,
        truncation_radius=args.trap_radius,
        steps_per_axis=args.trap_steps,
        refine=not args.no_refine,
    )


def _params(args) -> dict[str, float]:
    names = SECOND_PARAMS if args.theorem == "second" else FOURTH_PARAMS
    return {k: float(getattr(args, k)) for k in names}


def _aggregate(args) -> str:
    return args.pair_aggregate.replace("-", "_")


def _finite(report) -> None:
    if not (math.isfinite(report.lhs) and math.isfinite(report.slack)):
        raise NumericalError(f"non-finite result at x={report.x}, t={report.t}")


def cmd_check(args) -> int:
    data = load_scenario(args.scenario)
    spec = _quadrature(args)
    params = _params(args)
    reports = []
    for x in _parse_points(args.x):
        for t in args.t:
            if args.theorem == "fourth":
                k = FourthOrderParams(**params, variant=args.variant)
                if not admissible_fourth(data.n, k) and not args.allow_inadmissible:
                    raise InputError(f"inadmissible parameters {params} (pass --allow-inadmissible to explore)")
            r = evaluate(args.theorem, data, x, t, params, args.variant, spec, _aggregate(args))
            _finite(r)
            reports.append(r)
    payload = {"schema": SCHEMA, "scenario": str(args.scenario), "reports": [r.to_dict() for r in reports]}
    _emit(_dump(payload), args.out)
    failed = [r for r in reports if r.violated]
    for r in failed:
        log.error("slack %.6g below -%.3g at x=%s t=%g", r.slack, r.tolerance, list(r.x), r.t)
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_derivatives(args) -> int:
    data = load_scenario(args.scenario)
    spec = _quadrature(args)
    records = []
    for x in _parse_points(args.x):
        for t in args.t:
            r = ratios_from_moments(moments(data, x, t, spec), t, data.n)
            fd = finite_difference_ratios(data, x, t, args.fd_step)
            ratios, oracle, abs_d, rel_d = {}, {}, {}, {}
            for (label, _, v), (_, _, w) in zip(r.entries(), fd.entries()):
                ratios[label], oracle[label] = v, w
                abs_d[label] = abs(v - w)
                rel_d[label] = abs(v - w) / abs(w) if w != 0 else (0.0 if v == 0 else math.inf)
            if not all(math.isfinite(v) for v in ratios.values()):
                raise NumericalError(f"non-finite derivative ratio at x={x}, t={t}")
            records.append({
                "x": list(x), "t": t, "ratios": ratios, "fd_oracle": oracle,
                "abs_delta": abs_d, "rel_delta": rel_d,
            })
    _emit(_dump({"schema": SCHEMA, "scenario": str(args.scenario), "records": records}), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenarios = [load_scenario(p) for p in args.scenario]
    spec = SweepSpec(
        theorem=args.theorem,
        scenarios=scenarios,
        points=_parse_points(args.x),
        times=args.t,
        grid=_parse_grid(args.grid),
        fixed=_params(args),
        variant=args.variant,
        aggregate=_aggregate(args),
        quadrature=_quadrature(args),
        jobs=args.jobs,
    )
    reports = sweep(spec)
    for r in reports:
        _finite(r)
    _emit(sweep_csv(spec, reports), args.out)
    ids = [s for s, *_ in spec.rows()]
    summary = minimal_slack_report(reports, ids)
    summary["scenarios"] = [str(p) for p in args.scenario]
    if args.summary:
        write_atomic(args.summary, _dump({"schema": SCHEMA, **summary}))
    log.info("min slack %.6g over %d evaluations", summary["min_slack"], summary["count"])
    failed = [r for r in reports if r.violated]
    if failed:
        log.error("%d guaranteed evaluations violate their tolerance", len(failed))
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_probe(args) -> int:
    params = _params(args)
    family = make_family(args.family.replace("-", "_"), args.theorem, args.n, args.t[0], args.variant, params)
    result = minimize_slack(
        args.theorem, args.n, family, args.variant, args.budget, args.seed,
        _quadrature(args), _aggregate(args), args.jobs, args.scale_free,
    )
    payload = {"schema": SCHEMA, "theorem": args.theorem, "n": args.n, **result.to_dict()}
    _emit(_dump(payload), args.out)
    if args.scenario_out:
        write_atomic(args.scenario_out, dumps_scenario(InitialData.from_dict(result.argmin["scenario"])))
    guaranteed = args.theorem == "second" or args.variant.replace("-", "_") == "rederived"
    if guaranteed and result.best_slack < -PROBE_TOL:
        log.error("probe found slack %.6g in a guaranteed mode", result.best_slack)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(stream=sys.stdout)
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--quad-engine", default="closed-form", choices=["closed-form", "gauss-hermite", "trapezoid"])
    common.add_argument("--quad-order", type=int, default=40)
    common.add_argument("--trap-radius", type=float, default=8.0)
    common.add_argument("--trap-steps", type=int, default=512)
    common.add_argument("--no-refine", action="store_true", help="skip the refinement error estimate")

    ineq = argparse.ArgumentParser(add_help=False)
    ineq.add_argument("--theorem", choices=["second", "fourth"], default="second")
    ineq.add_argument("--variant", choices=["as-stated", "rederived", "as_stated"], default="rederived")
    ineq.add_argument("--pair-aggregate", choices=[a.replace("_", "-") for a in AGGREGATES], default="squared-sum")
    for name, default in (("alpha", 0.0), ("beta", 0.0), ("gamma", 1.0), ("k1", 0.0), ("k2", 0.0), ("k3", 0.0), ("k4", 0.0)):
        ineq.add_argument(f"--{name}", type=float, default=default)

    where = argparse.ArgumentParser(add_help=False)
    where.add_argument("--x", nargs="+", action="append", metavar="COORD", help="evaluation point; repeat for several")
    where.add_argument("--t", nargs="+", type=float, default=[1.0])

    parser = argparse.ArgumentParser(prog="liyau", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common, ineq, where], help="evaluate one inequality")
    p.add_argument("--scenario", required=True)
    p.add_argument("--allow-inadmissible", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("derivatives", parents=[common, where], help="derivative ratios vs finite differences")
    p.add_argument("--scenario", required=True)
    p.add_argument("--fd-step", type=float, default=None)
    p.set_defaults(func=cmd_derivatives)

    p = sub.add_parser("sweep", parents=[common, ineq, where], help="grid sweep to CSV")
    p.add_argument("--scenario", action="append", required=True)
    p.add_argument("--grid", action="append", default=[], metavar="NAME=LO:HI:STEPS")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--summary", help="write the minimal-slack summary JSON here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("probe", parents=[common, ineq], help="minimize slack over a scenario family")
    p.add_argument("--family", default="mixture2",
                   choices=["single-gaussian", "constant", "mixture1", "mixture2", "mixture3"])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--t", nargs="+", type=float, default=[1.0], help="time for fixed-time families")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--scale-free", action="store_true")
    p.add_argument("--scenario-out", help="write the minimizing scenario JSON here")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("selftest", parents=[common], help="run the oracle battery")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (InputError, OSError, ValueError, KeyError, TypeError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    except (FloatingPointError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
