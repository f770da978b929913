"""Parameter sweeps, sharpness curves and slack minimization."""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Literal, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import BudgetTooSmall, DimensionMismatch, InputError
from .initial_data import T_MIN, GaussianComponent, InitialData
from .inequalities import (
    CheckReport,
    FourthOrderParams,
    SecondOrderParams,
    check_fourth_order,
    check_second_order,
    normalize_variant,
)
from .quadrature import QuadratureSpec

Theorem = Literal["second", "fourth"]
SECOND_PARAMS = ("alpha", "beta", "gamma")
FOURTH_PARAMS = ("k1", "k2", "k3", "k4")
MIN_BUDGET = 50


def param_names(theorem: str) -> tuple[str, ...]:
    if theorem == "second":
        return SECOND_PARAMS
    if theorem == "fourth":
        return FOURTH_PARAMS
    raise InputError(f"unknown theorem {theorem!r}")


def evaluate(
    theorem: str,
    data: InitialData,
    x,
    t: float,
    params: Mapping[str, float],
    variant: str = "rederived",
    spec: QuadratureSpec | None = None,
    aggregate: str = "squared_sum",
) -> CheckReport:
    """Single inequality evaluation; inadmissible parameters are reported, not rejected."""
    if theorem == "second":
        return check_second_order(data, x, t, SecondOrderParams(**params), spec)
    k = FourthOrderParams(**params, variant=variant)
    return check_fourth_order(data, x, t, k, spec, aggregate, allow_inadmissible=True)


@dataclass(frozen=True)
class SweepSpec:
    theorem: Theorem
    scenarios: Sequence[InitialData]
    points: Sequence[Sequence[float]]
    times: Sequence[float]
    grid: Mapping[str, tuple[float, float, int]] = field(default_factory=dict)
    fixed: Mapping[str, float] = field(default_factory=dict)
    param_list: Sequence[Mapping[str, float]] = ()
    variant: str = "rederived"
    aggregate: str = "squared_sum"
    quadrature: QuadratureSpec | None = None
    jobs: int = 1

    def __post_init__(self):
        names = param_names(self.theorem)
        object.__setattr__(self, "variant", normalize_variant(self.variant))
        if not self.scenarios or not self.points or not self.times:
            raise InputError("sweep needs at least one scenario, point and time")
        if any(float(t) < T_MIN for t in self.times):
            raise InputError(f"sweep times must be >= {T_MIN:g}")
        for key in list(self.grid) + list(self.fixed):
            if key not in names:
                raise InputError(f"unknown parameter {key!r} for theorem {self.theorem}")
        for lo, hi, steps in self.grid.values():
            if int(steps) < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
                raise InputError("grid axes need finite bounds and at least one step")
        for sc in self.scenarios:
            for x in self.points:
                if len(x) != sc.n:
                    raise DimensionMismatch(f"point {tuple(x)} does not match scenario dimension {sc.n}")
        if int(self.jobs) < 1:
            raise InputError("jobs must be >= 1")

    def parameter_sets(self) -> list[dict[str, float]]:
        if self.param_list:
            return [dict(p) for p in self.param_list]
        names = param_names(self.theorem)
        base = {"alpha": 0.0, "beta": 0.0, "gamma": 1.0} if self.theorem == "second" else {}
        base.update({k: float(v) for k, v in self.fixed.items()})
        axes = []
        for name in names:
            if name in self.grid:
                lo, hi, steps = self.grid[name]
                axes.append([(name, float(v)) for v in np.linspace(lo, hi, int(steps))])
        out = []
        for combo in itertools.product(*axes):
            p = dict(base)
            p.update(combo)
            out.append({k: p.get(k, 0.0) for k in names})
        return out

    def rows(self) -> Iterator[tuple[int, tuple[float, ...], float, dict[str, float]]]:
        """Grid points in lexicographic order: scenario, point, time, parameters."""
        psets = self.parameter_sets()
        for s, x, t, p in itertools.product(range(len(self.scenarios)), self.points, self.times, psets):
            yield s, tuple(float(v) for v in x), float(t), p


def sweep(spec: SweepSpec) -> list[CheckReport]:
    def one(row):
        s, x, t, p = row
        return evaluate(spec.theorem, spec.scenarios[s], x, t, p, spec.variant, spec.quadrature, spec.aggregate)

    rows = list(spec.rows())
    if spec.jobs == 1:
        return [one(r) for r in rows]
    with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
        return list(pool.map(one, rows))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sweep_csv(spec: SweepSpec, reports: Sequence[CheckReport]) -> str:
    """CSV text for a sweep; floats are written with full round-trip precision."""
    names = param_names(spec.theorem)
    width = max(sc.n for sc in spec.scenarios)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["theorem", "variant", "n", "t", *[f"x{i}" for i in range(width)], *names]
        + ["lhs", "rhs", "slack", "err", "admissible", "scenario"]
    )
    for (s, x, t, p), r in zip(spec.rows(), reports):
        xs = list(x) + [""] * (width - len(x))
        variant = r.variant if r.variant else ""
        w.writerow(
            [_fmt(v) for v in (r.theorem, variant, r.n, r.t, *xs, *(p[k] for k in names))]
            + [_fmt(v) for v in (r.lhs, r.rhs, r.slack, r.err, r.admissible, s)]
        )
    return buf.getvalue()


def minimal_slack_report(reports: Sequence[CheckReport], scenario_ids: Sequence[int] | None = None) -> dict:
    """Smallest slack over ``reports`` and the evaluation that attains it."""
    if not reports:
        raise InputError("no reports to summarize")
    slacks = np.array([r.slack if math.isfinite(r.slack) else np.inf for r in reports])
    i = int(np.argmin(slacks))
    worst = reports[i]
    negative = [j for j, r in enumerate(reports) if r.slack < -r.tolerance]
    return {
        "count": len(reports),
        "min_slack": worst.slack,
        "violations": len(negative),
        "holds_within_tolerance": not negative,
        "witness": {
            "scenario": None if scenario_ids is None else int(scenario_ids[i]),
            **worst.to_dict(),
        },
    }


# --- sharpness ------------------------------------------------------------


def sharpness_curve(n: int, t: float, sigma_list: Sequence[float], gamma_one: bool = True) -> list[tuple[float, float, float]]:
    """Slack at the center of a single Gaussian, measured and predicted.

    ``gamma_one`` selects the classical ``Laplacian(log u)`` form; otherwise
    all three coefficients are zero.  At the center the gradient vanishes, so
    both give ``n sigma^2 / (2t (sigma^2 + 2t))``; ``sigma = 0`` is the point
    mass, where equality holds.
    """
    p = SecondOrderParams(0.0, 0.0, 1.0 if gamma_one else 0.0)
    out = []
    for sigma in sigma_list:
        sigma = float(sigma)
        if sigma < 0:
            raise InputError("sigma values must be nonnegative")
        data = InitialData(n, 0.0, (GaussianComponent(1.0, (0.0,) * n, sigma),))
        slack = check_second_order(data, (0.0,) * n, t, p).slack
        predicted = n * sigma**2 / (2.0 * t * (sigma**2 + 2.0 * t))
        out.append((sigma, slack, predicted))
    return out


# --- optimization ---------------------------------------------------------

SIGMA_RANGE = (1e-2, 10.0)
CENTER_RANGE = (-5.0, 5.0)
TIME_RANGE = (1e-2, 10.0)
POINT_RANGE = (-5.0, 5.0)
WEIGHT_RANGE = (1e-3, 1.0)


@dataclass(frozen=True)
class Scenario:
    data: InitialData
    x: tuple[float, ...]
    t: float
    params: dict


@dataclass(frozen=True)
class Family:
    """Bounded parameter vector -> scenario map.

    ``build`` receives a vector already clipped to ``[lower, upper]`` and must
    return admissible inequality parameters (projection, not penalties).
    """

    name: str
    lower: np.ndarray
    upper: np.ndarray
    build: Callable[[np.ndarray], Scenario]

    def __call__(self, theta) -> Scenario:
        return self.build(np.clip(np.asarray(theta, dtype=float), self.lower, self.upper))


def project_second(n: int, a: float, b: float, c: float) -> dict[str, float]:
    """Scale nonnegative ``(alpha, beta, gamma)`` back onto the admissible set."""
    a, b, c = max(a, 0.0), max(b, 0.0), max(c, 0.0)
    s = (n - 1) * (a + b) + c
    if s > 1.0:
        a, b, c = a / s, b / s, c / s
    return {"alpha": a, "beta": b, "gamma": c}


def project_fourth(n: int, k1: float, k2: float, k3: float, k4: float, variant: str) -> dict[str, float]:
    """Clamp ``k`` into the admissible set of ``variant``."""
    k2, k3, k4 = min(k2, 0.0), min(k3, 0.0), min(k4, 0.0)
    floor = -(1.0 - 1e-6) / n
    if k2 + k3 <= floor:
        scale = floor / (k2 + k3)
        k2, k3 = k2 * scale, k3 * scale
    pairs = n if normalize_variant(variant) == "as_stated" else n * (n - 1)
    k1 = max(k1, -pairs * k4)
    return {"k1": k1, "k2": k2, "k3": k3, "k4": k4}


def _param_axes(theorem: str, n: int):
    if theorem == "second":
        return [(0.0, 1.0)] * 3
    return [(0.0, 2.0 * max(n * (n - 1), 1)), (-0.5 / n, 0.0), (-0.5 / n, 0.0), (-1.0, 0.0)]


def _params_from(theorem: str, n: int, values, variant: str) -> dict[str, float]:
    if theorem == "second":
        return project_second(n, *values)
    return project_fourth(n, *values, variant=variant)


def single_gaussian_family(theorem: str, n: int, t: float, params: Mapping[str, float] | None = None, variant: str = "rederived") -> Family:
    """Width of one Gaussian free, evaluated at its center at fixed ``t``."""
    if params is None:
        params = {"alpha": 0.0, "beta": 0.0, "gamma": 1.0} if theorem == "second" else {k: 0.0 for k in FOURTH_PARAMS}
    fixed = _params_from(theorem, n, [params[k] for k in param_names(theorem)], variant)

    def build(theta):
        data = InitialData(n, 0.0, (GaussianComponent(1.0, (0.0,) * n, float(theta[0])),))
        return Scenario(data, (0.0,) * n, float(t), dict(fixed))

    return Family("single_gaussian", np.array([SIGMA_RANGE[0]]), np.array([SIGMA_RANGE[1]]), build)


def constant_family(theorem: str, n: int, t: float, params: Mapping[str, float] | None = None, variant: str = "rederived") -> Family:
    """Constant data; the free coordinate only moves the evaluation point."""
    if params is None:
        params = {"alpha": 0.0, "beta": 0.0, "gamma": 1.0} if theorem == "second" else {k: 0.0 for k in FOURTH_PARAMS}
    fixed = _params_from(theorem, n, [params[k] for k in param_names(theorem)], variant)

    def build(theta):
        x = (float(theta[0]),) + (0.0,) * (n - 1)
        return Scenario(InitialData(n, 1.0), x, float(t), dict(fixed))

    return Family("constant", np.array([POINT_RANGE[0]]), np.array([POINT_RANGE[1]]), build)


def mixture_family(theorem: str, n: int, components: int = 2, variant: str = "rederived") -> Family:
    """Up to three Gaussians plus offset, with free point, time and inequality parameters.

    Layout: ``[offset, (weight, center..., sigma) * components, x..., t, params...]``.
    """
    if not 1 <= components <= 3:
        raise InputError("mixture families have 1 to 3 components")
    lower, upper = [0.0], [1.0]
    for _ in range(components):
        lower += [WEIGHT_RANGE[0], *[CENTER_RANGE[0]] * n, SIGMA_RANGE[0]]
        upper += [WEIGHT_RANGE[1], *[CENTER_RANGE[1]] * n, SIGMA_RANGE[1]]
    lower += [POINT_RANGE[0]] * n + [TIME_RANGE[0]]
    upper += [POINT_RANGE[1]] * n + [TIME_RANGE[1]]
    for lo, hi in _param_axes(theorem, n):
        lower.append(lo)
        upper.append(hi)
    stride = n + 2

    def build(theta):
        comps = []
        for c in range(components):
            block = theta[1 + c * stride: 1 + (c + 1) * stride]
            comps.append(GaussianComponent(float(block[0]), tuple(float(v) for v in block[1:1 + n]), float(block[-1])))
        rest = theta[1 + components * stride:]
        x = tuple(float(v) for v in rest[:n])
        t = float(rest[n])
        params = _params_from(theorem, n, [float(v) for v in rest[n + 1:]], variant)
        return Scenario(InitialData(n, float(theta[0]), tuple(comps)), x, t, params)

    return Family(f"mixture{components}", np.array(lower), np.array(upper), build)


def make_family(name: str, theorem: str, n: int, t: float = 1.0, variant: str = "rederived", params: Mapping[str, float] | None = None) -> Family:
    if name == "single_gaussian":
        return single_gaussian_family(theorem, n, t, params, variant)
    if name == "constant":
        return constant_family(theorem, n, t, params, variant)
    if name.startswith("mixture"):
        count = int(name[len("mixture"):] or 2)
        return mixture_family(theorem, n, count, variant)
    raise InputError(f"unknown family {name!r}")


@dataclass(frozen=True)
class ProbeResult:
    best_slack: float
    argmin: dict
    iterations: int
    converged: bool
    history: list[tuple[int, float]]
    seed: int

    def to_dict(self) -> dict:
        return {
            "best_slack": self.best_slack,
            "argmin": self.argmin,
            "iterations": self.iterations,
            "converged": self.converged,
            "history": [list(h) for h in self.history],
            "seed": self.seed,
        }


def scale_free_slack(report: CheckReport) -> float:
    """Slack times ``t`` (second order) or ``t^2`` (fourth order); invariant under parabolic rescaling."""
    return report.slack * (report.t if report.theorem == "second" else report.t**2)


class _Objective:
    def __init__(self, theorem, family, variant, spec, aggregate, scale_free):
        self.theorem, self.family, self.variant = theorem, family, variant
        self.spec, self.aggregate, self.scale_free = spec, aggregate, scale_free
        self.span = family.upper - family.lower

    def theta(self, unit) -> np.ndarray:
        return self.family.lower + np.clip(unit, 0.0, 1.0) * self.span

    def slack(self, theta) -> float:
        sc = self.family(theta)
        r = evaluate(self.theorem, sc.data, sc.x, sc.t, sc.params, self.variant, self.spec, self.aggregate)
        value = scale_free_slack(r) if self.scale_free else r.slack
        return value if math.isfinite(value) else math.inf


def _local_search(obj: _Objective, start: np.ndarray, maxfev: int) -> tuple[list[tuple[float, np.ndarray]], bool]:
    trace: list[tuple[float, np.ndarray]] = []

    def f(unit):
        if len(trace) >= maxfev:
            return math.inf
        theta = obj.theta(unit)
        value = obj.slack(theta)
        trace.append((value, theta))
        return value

    d = start.shape[0]
    simplex = np.vstack([start] + [start + np.where(start[i] > 0.5, -0.1, 0.1) * np.eye(d)[i] for i in range(d)])
    res = minimize(
        f,
        start,
        method="Nelder-Mead",
        options={"maxfev": maxfev, "initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-14},
    )
    return trace, bool(res.success)


def minimize_slack(
    theorem: str,
    n: int,
    family: Family,
    variant: str = "rederived",
    budget: int = 1000,
    seed: int = 0,
    spec: QuadratureSpec | None = None,
    aggregate: str = "squared_sum",
    jobs: int = 1,
    scale_free: bool = False,
) -> ProbeResult:
    """Derivative-free search for the smallest slack over a scenario family.

    A uniform random pre-scan uses a quarter of the budget; Nelder-Mead is
    restarted from the best ``max(4, budget // 200)`` scan points with the rest.
    The result is the best evaluation seen and carries no global guarantee.
    With ``scale_free`` the objective is :func:`scale_free_slack`, which keeps
    the search from drifting to large ``t`` where every slack shrinks.
    """
    if budget < MIN_BUDGET:
        raise BudgetTooSmall(f"budget must be at least {MIN_BUDGET} evaluations")
    param_names(theorem)
    variant = normalize_variant(variant)
    rng = np.random.default_rng(seed)
    obj = _Objective(theorem, family, variant, spec, aggregate, scale_free)
    d = family.lower.shape[0]
    restarts = max(4, budget // 200)
    scan_size = max(restarts, budget // 4)

    scan_units = rng.uniform(size=(scan_size, d))
    scan = [(obj.slack(obj.theta(u)), obj.theta(u)) for u in scan_units]
    order = np.argsort([s for s, _ in scan], kind="stable")[:restarts]
    starts = [scan_units[i] for i in order]
    maxfev = max(d + 2, (budget - scan_size) // restarts)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(lambda s: _local_search(obj, s, maxfev), starts))
    else:
        runs = [_local_search(obj, s, maxfev) for s in starts]

    evaluations = scan + [item for trace, _ in runs for item in trace]
    history, best, best_theta = [], math.inf, None
    for i, (value, theta) in enumerate(evaluations):
        if value < best:
            best, best_theta = value, theta
            history.append((i, value))
    if best_theta is None:
        raise InputError("every evaluation of the family failed")
    sc = family(best_theta)
    argmin = {
        "family": family.name,
        "theta": [float(v) for v in best_theta],
        "scenario": sc.data.to_dict(),
        "x": list(sc.x),
        "t": sc.t,
        "params": sc.params,
        "variant": variant if theorem == "fourth" else None,
        "scale_free": bool(scale_free),
    }
    return ProbeResult(
        best_slack=best,
        argmin=argmin,
        iterations=len(evaluations),
        converged=any(ok for _, ok in runs),
        history=history,
        seed=int(seed),
    )


def reevaluate(theorem: str, result: ProbeResult, spec: QuadratureSpec | None = None, aggregate: str = "squared_sum") -> float:
    a = result.argmin
    data = InitialData.from_dict(a["scenario"])
    r = evaluate(theorem, data, a["x"], a["t"], a["params"], a["variant"] or "rederived", spec, aggregate)
    return scale_free_slack(r) if a.get("scale_free") else r.slack
