"""Oracle battery behind ``liyau selftest``."""
from __future__ import annotations

import math
import sys
import time

import numpy as np
from scipy.special import gamma as gamma_fn

from .initial_data import GaussianComponent, InitialData, closed_form_moments, heat_solution
from .kernel_moments import finite_difference_ratios, heat_residual, jensen_gap, pair_identity, ratios_from_moments
from .quadrature import QuadratureSpec, gauss_hermite_rule, normalization, quadrature_moments

SCENARIOS = [
    (InitialData(1, 0.0, (GaussianComponent(1.0, (0.3,), 0.7),)), (0.9,), 0.4),
    (InitialData(2, 0.5, (GaussianComponent(2.0, (0.5, -1.0), 0.4), GaussianComponent(1.0, (-1.0, 0.5), 1.2))), (1.1, 0.2), 0.3),
    (InitialData(3, 0.2, (GaussianComponent(1.0, (0.0, 0.4, -0.3), 0.9),)), (0.5, -0.6, 0.8), 1.5),
]


def _exactness() -> float:
    worst = 0.0
    for order in range(1, 41):
        z, w = gauss_hermite_rule(order)
        for d in range(0, 2 * order, 2):
            worst = max(worst, abs(float(np.dot(w, z**d)) / gamma_fn((d + 1) / 2) - 1.0))
    return worst


def _normalization() -> float:
    return max(
        abs(normalization(d, x, t, QuadratureSpec(engine=e, steps_per_axis=64, order_per_axis=20, refine=False)) - 1.0)
        for d, x, t in SCENARIOS
        for e in ("gauss_hermite", "trapezoid")
    )


def _engines() -> float:
    worst = 0.0
    for d, x, t in SCENARIOS:
        ref = closed_form_moments(d, x, t).as_vector()
        for e in ("gauss_hermite", "trapezoid"):
            mb = quadrature_moments(d, x, t, QuadratureSpec(engine=e))
            worst = max(worst, float(np.max(np.abs(mb.as_vector() - ref))) / max(1e-6, 3 * mb.err_estimate))
    return worst


def _ratios_vs_fd() -> float:
    worst = 0.0
    for d, x, t in SCENARIOS:
        r = ratios_from_moments(closed_form_moments(d, x, t), t)
        fd = finite_difference_ratios(d, x, t)
        for (_, _, v), (_, _, w) in zip(r.entries(), fd.entries()):
            gap = abs(v - w) / 1e-8 if abs(w) < 1e-6 else abs(v - w) / (1e-5 * abs(w))
            worst = max(worst, gap)
    return worst


def _pair_identity() -> float:
    rng = np.random.default_rng(0)
    worst = 0.0
    for n in range(1, 9):
        for _ in range(20):
            lhs, rhs = pair_identity(rng.normal(size=n))
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst


def _jensen() -> float:
    rng = np.random.default_rng(1)
    worst = math.inf
    for p in (1.0, 1.5, 2.0, 3.0):
        for _ in range(50):
            g = rng.random(12)
            worst = min(worst, jensen_gap(rng.normal(size=12), g / g.sum(), p))
    return worst


def _heat() -> float:
    return max(abs(heat_residual(d, x, 1.0)) / heat_solution(d, x, 1.0) for d, x, _ in SCENARIOS)


CHECKS = [
    ("gauss-hermite exactness (rel <= 1e-12)", _exactness, lambda v: v <= 1e-12),
    ("measure normalization (<= 1e-10)", _normalization, lambda v: v <= 1e-10),
    ("closed form vs engines (ratio to tolerance <= 1)", _engines, lambda v: v <= 1.0),
    ("derivative ratios vs finite differences (ratio to tolerance <= 1)", _ratios_vs_fd, lambda v: v <= 1.0),
    ("pair-sum identity (<= 1e-12)", _pair_identity, lambda v: v <= 1e-12),
    ("Jensen gap (>= -1e-12)", _jensen, lambda v: v >= -1e-12),
    ("heat residual (rel <= 1e-5)", _heat, lambda v: v <= 1e-5),
]


def run_selftest(stream=sys.stdout) -> bool:
    ok = True
    start = time.perf_counter()
    for name, fn, accept in CHECKS:
        value = fn()
        passed = bool(accept(value))
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {value:.3e}", file=stream)
    print(f"{'OK' if ok else 'FAILED'} in {time.perf_counter() - start:.1f}s", file=stream)
    return ok
