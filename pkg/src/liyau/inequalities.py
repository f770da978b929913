"""Second- and fourth-order Li-Yau type inequalities: admissibility, both sides, slack.

Fourth-order bounds come in two constant sets:

``as_stated``
    ``k1 >= -n k4`` and the bound ``3n + k1 + n^2 k3 - n (3 + (n-1) k1 + n k3)^2 / (1 + n (k2 + k3))``
    over ``4 t^2``.
``rederived``
    Constants recounted over the ``n (n - 1)`` ordered pairs ``i != j``: the
    pure-time part of the ``k1`` term is ``4 n (n-1) t^2`` and the squared
    off-diagonal sum is bounded with factor ``n (n - 1)``.  This changes ``C``
    and the ``k1``/``k4`` constraint.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .errors import InadmissibleParams, InputError
from .initial_data import InitialData, MomentBundle, as_point, check_time, closed_form_moments
from .kernel_moments import DerivativeRatios, ratios_from_moments
from .quadrature import QuadratureSpec, quadrature_moments

Variant = Literal["as_stated", "rederived"]
Aggregate = Literal["squared_sum", "sum_of_squares"]
VARIANTS = ("as_stated", "rederived")
AGGREGATES = ("squared_sum", "sum_of_squares")

SECOND_ORDER_TOL = 1e-9
FOURTH_ORDER_TOL = 1e-8


def normalize_variant(variant: str) -> str:
    v = str(variant).replace("-", "_")
    if v not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return v


@dataclass(frozen=True)
class SecondOrderParams:
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not (value >= 0 and math.isfinite(value)):
                raise InputError(f"{name} must be a finite nonnegative number, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class FourthOrderParams:
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0
    variant: Variant = "rederived"

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InputError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "variant", normalize_variant(self.variant))


@dataclass(frozen=True)
class QuadraticFormCoeffs:
    """``h = C t^2 + B t |z|^2 + A |z|^4 + D sum_{i != j} z_i^2 z_j^2`` and its minimum ``F``."""

    A: float
    B: float
    C: float
    D: float
    F: float


@dataclass(frozen=True)
class CheckReport:
    theorem: Literal["second", "fourth"]
    n: int
    x: tuple[float, ...]
    t: float
    params: dict = field(compare=False)
    lhs: float
    rhs: float
    slack: float
    err: float
    admissible: bool
    variant: str | None = None

    @property
    def guaranteed(self) -> bool:
        """Whether a theorem claims ``slack >= 0`` at this point."""
        return self.admissible and (self.theorem == "second" or self.variant == "rederived")

    @property
    def tolerance(self) -> float:
        floor = SECOND_ORDER_TOL if self.theorem == "second" else FOURTH_ORDER_TOL
        return max(floor, 10.0 * self.err)

    @property
    def violated(self) -> bool:
        return self.guaranteed and not self.slack >= -self.tolerance

    def to_dict(self) -> dict:
        out = asdict(self)
        out["x"] = list(self.x)
        out = {k: out[k] for k in ("theorem", "variant", "n", "x", "t", "params", "lhs", "rhs", "slack", "err", "admissible")}
        return out


def admissible_second(n: int, p: SecondOrderParams) -> bool:
    return min(p.alpha, p.beta, p.gamma) >= 0 and (n - 1) * (p.alpha + p.beta) + p.gamma <= 1.0


def admissible_fourth(n: int, k: FourthOrderParams) -> bool:
    pair_count = n if k.variant == "as_stated" else n * (n - 1)
    return (
        k.k2 + k.k3 > -1.0 / n
        and k.k1 >= -pair_count * k.k4
        and k.k2 <= 0
        and k.k3 <= 0
        and k.k4 <= 0
    )


def stated_bound(n: int, k: FourthOrderParams) -> float:
    """Bound multiplier exactly as displayed with the fourth-order theorem."""
    denom = 1.0 + n * (k.k2 + k.k3)
    return 3 * n + k.k1 + n * n * k.k3 - n * (3 + (n - 1) * k.k1 + n * k.k3) ** 2 / denom


def quadratic_coeffs(n: int, k: FourthOrderParams, check: bool = True) -> QuadraticFormCoeffs:
    if check and not admissible_fourth(n, k):
        raise InadmissibleParams(f"parameters {k} are not admissible for n={n}")
    # (1 + n(k2 + k3)) / n avoids the inexact 1/n when k2 + k3 sits near -1/n
    A = (1.0 + n * (k.k2 + k.k3)) / n
    B = -12.0 - 4.0 * (n - 1) * k.k1 - 4.0 * n * k.k3
    if k.variant == "as_stated":
        C = 12.0 * n + 4.0 * k.k1 + 4.0 * n * n * k.k3
        D = k.k1 + n * k.k4
    else:
        C = 12.0 * n + 4.0 * n * (n - 1) * k.k1 + 4.0 * n * n * k.k3
        D = k.k1 + n * (n - 1) * k.k4
    F = (4.0 * A * C - B * B) / (16.0 * A) if A != 0 else float("nan")
    return QuadraticFormCoeffs(A, B, C, D, F)


def fourth_order_bound(n: int, k: FourthOrderParams) -> float:
    """``F`` such that the fourth-order right-hand side is ``F / (4 t^2)``."""
    if k.variant == "as_stated":
        return stated_bound(n, k) if 1.0 + n * (k.k2 + k.k3) != 0 else float("nan")
    return quadratic_coeffs(n, k, check=False).F


def pair_sum(hess) -> float:
    """``sum_{i != j} hess[i, j]``."""
    hess = np.asarray(hess, dtype=float)
    return float(hess.sum() - np.trace(hess))


def pair_square_sum(hess) -> float:
    """``sum_{i != j} hess[i, j]^2``."""
    hess = np.asarray(hess, dtype=float)
    return float((hess * hess).sum() - np.sum(np.diag(hess) ** 2))


def second_order_lhs(r: DerivativeRatios, p: SecondOrderParams) -> float:
    g = r.grad
    cross_grad = float(g.sum() ** 2 - g @ g)
    return float(np.trace(r.hess) - p.alpha * pair_sum(r.hess) - p.beta * cross_grad - p.gamma * (g @ g))


def fourth_order_lhs(r: DerivativeRatios, k: FourthOrderParams, aggregate: Aggregate = "squared_sum") -> float:
    if aggregate == "squared_sum":
        off = pair_sum(r.hess) ** 2
    elif aggregate == "sum_of_squares":
        off = pair_square_sum(r.hess)
    else:
        raise InputError(f"unknown pair aggregate {aggregate!r}")
    g2 = float(r.grad @ r.grad)
    lap = float(np.trace(r.hess))
    return float(
        r.fourth_diag.sum()
        + k.k1 * r.fourth_pair.sum()
        + k.k2 * g2 * g2
        + k.k3 * lap * lap
        + k.k4 * off
    )


def moments(data: InitialData, x, t: float, spec: QuadratureSpec | None = None) -> MomentBundle:
    """Closed-form bundle when ``spec`` is None, otherwise the chosen engine's."""
    if spec is None:
        return closed_form_moments(data, x, t)
    return quadrature_moments(data, x, t, spec)


def _propagate(moment_err: float, n: int, coefs, denom: float) -> float:
    # crude first-order bound: every ratio is a moment sum over <= n^2 terms divided by denom
    if moment_err == 0:
        return 0.0
    return moment_err * n * n * (1.0 + sum(abs(c) for c in coefs)) / denom


def check_second_order(data: InitialData, x, t: float, p: SecondOrderParams, spec: QuadratureSpec | None = None) -> CheckReport:
    t = check_time(t)
    x = as_point(x, data.n)
    mb = moments(data, x, t, spec)
    r = ratios_from_moments(mb, t, data.n)
    lhs = second_order_lhs(r, p)
    rhs = -data.n / (2.0 * t)
    return CheckReport(
        theorem="second",
        n=data.n,
        x=tuple(float(v) for v in x),
        t=t,
        params={"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma},
        lhs=lhs,
        rhs=rhs,
        slack=lhs - rhs,
        err=_propagate(mb.err_estimate, data.n, (p.alpha, p.beta, p.gamma), 4.0 * t * t),
        admissible=admissible_second(data.n, p),
    )


def check_fourth_order(
    data: InitialData,
    x,
    t: float,
    k: FourthOrderParams,
    spec: QuadratureSpec | None = None,
    aggregate: Aggregate = "squared_sum",
    allow_inadmissible: bool = False,
) -> CheckReport:
    """Evaluate the fourth-order inequality at ``(x, t)``.

    Inadmissible ``k`` raise :class:`InadmissibleParams` unless
    ``allow_inadmissible`` is set, in which case the report carries
    ``admissible=False``.
    """
    t = check_time(t)
    x = as_point(x, data.n)
    ok = admissible_fourth(data.n, k)
    if not ok and not allow_inadmissible:
        raise InadmissibleParams(f"parameters {k} are not admissible for n={data.n}")
    mb = moments(data, x, t, spec)
    r = ratios_from_moments(mb, t, data.n)
    lhs = fourth_order_lhs(r, k, aggregate)
    rhs = fourth_order_bound(data.n, k) / (4.0 * t * t)
    err = _propagate(mb.err_estimate, data.n, (k.k1, k.k2, k.k3, k.k4), 16.0 * t**4)
    return CheckReport(
        theorem="fourth",
        n=data.n,
        x=tuple(float(v) for v in x),
        t=t,
        params={"k1": k.k1, "k2": k.k2, "k3": k.k3, "k4": k.k4, "pair_aggregate": aggregate},
        lhs=lhs,
        rhs=rhs,
        slack=lhs - rhs,
        err=err,
        admissible=ok,
        variant=k.variant,
    )
