"""Numerical integration against the heat-kernel measure ``nu_{x,t}``.

Both engines reduce ``Phi(x - y, t) g(y) dy`` to a sum of *pieces*, one per
term of ``g``.  Each piece is a tensor product of weighted 1-D point sets, so
monomials of ``x - y`` factorize into per-axis sums while arbitrary callables
are evaluated on the full tensor grid.  The normalization ``u(x, t)`` is
accumulated from the same nodes as every numerator.

``gauss_hermite`` has two node placements:

* ``adapt=True`` (default): each piece is integrated with a Gauss-Hermite rule
  centered and scaled to the Gaussian law that piece induces on ``y``.
* ``adapt=False``: a single rule ``y = x - 2 sqrt(t) z`` turns the heat kernel
  into the ``exp(-z^2)`` weight and ``g`` is sampled at the nodes.  This is
  only accurate when every ``sigma`` is comparable to ``sqrt(t)`` or larger.

``trapezoid`` samples the kernel and ``g`` directly on a truncated uniform box
around ``x`` and shares nothing with the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .errors import ClosedFormOnlyData, DimensionTooLarge, InputError, OrderTooLarge
from .initial_data import (
    MAX_AXIS_DEGREE,
    InitialData,
    MomentBundle,
    as_point,
    check_time,
    piece_laws,
)

MAX_ORDER = 128
MAX_TENSOR_DIM = 4
REFINE_ORDER_STEP = 8
_CHUNK = 1 << 18

Engine = Literal["gauss_hermite", "trapezoid"]
Integrand = Union[Callable[[np.ndarray], np.ndarray], Sequence[int]]


@dataclass(frozen=True)
class QuadratureSpec:
    engine: Engine = "gauss_hermite"
    order_per_axis: int = 40
    truncation_radius: float = 8.0
    steps_per_axis: int = 512
    refine: bool = True
    adapt: bool = True

    def __post_init__(self):
        if self.engine not in ("gauss_hermite", "trapezoid"):
            raise InputError(f"unknown quadrature engine {self.engine!r}")
        if self.order_per_axis < 2:
            raise InputError("order_per_axis must be >= 2")
        if self.order_per_axis + (REFINE_ORDER_STEP if self.refine else 0) > MAX_ORDER:
            raise OrderTooLarge(f"Gauss-Hermite order is capped at {MAX_ORDER}")
        if self.steps_per_axis < 8:
            raise InputError("steps_per_axis must be >= 8")
        if not self.truncation_radius >= 4:
            raise InputError("truncation_radius must be >= 4")


@lru_cache(maxsize=None)
def _hermgauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    z, w = np.polynomial.hermite.hermgauss(order)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def gauss_hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the weight ``exp(-z^2)`` on the real line.

    Exact for polynomials of degree ``<= 2*order - 1``.  Returned arrays are
    shared and read-only.
    """
    order = int(order)
    if order < 1:
        raise InputError("order must be >= 1")
    if order > MAX_ORDER:
        raise OrderTooLarge(f"order {order} exceeds the cap of {MAX_ORDER}")
    return _hermgauss(order)


@dataclass(frozen=True)
class _Piece:
    log_scale: float
    nodes: np.ndarray  # (n, q) values of y per axis
    weights: np.ndarray  # (n, q), each row max-normalized


def _normalize_rows(log_w: np.ndarray) -> tuple[float, np.ndarray]:
    top = log_w.max(axis=1, keepdims=True)
    return float(top.sum()), np.exp(log_w - top)


def _check_inputs(data: InitialData, x, t: float) -> tuple[np.ndarray, float]:
    if data.closed_form_only:
        raise ClosedFormOnlyData("point-mass data are handled by the closed form only")
    if data.n > MAX_TENSOR_DIM:
        raise DimensionTooLarge(f"tensor quadrature supports n <= {MAX_TENSOR_DIM}, got {data.n}")
    return as_point(x, data.n), check_time(t)


def _component_log_factor(data: InitialData, nodes: np.ndarray):
    """Yield (log amplitude, per-axis log factor) for each term of ``g``."""
    if data.constant_offset > 0:
        yield math.log(data.constant_offset), np.zeros_like(nodes)
    for c in data.components:
        mu = np.asarray(c.center)[:, None]
        yield math.log(c.weight), -((nodes - mu) ** 2) / (2.0 * c.sigma**2)


def _gh_pieces(data: InitialData, x: np.ndarray, t: float, order: int, adapt: bool) -> list[_Piece]:
    z, w = gauss_hermite_rule(order)
    log_w = np.log(w / math.sqrt(math.pi))
    n = data.n
    pieces = []
    if adapt:
        laws = piece_laws(data, x, t)
        axis_weights = np.broadcast_to(w / w.max(), (n, order))
        row_scale = n * float(log_w.max())
        for lm, mean, var in zip(laws.log_mass, laws.mean, laws.var):
            nodes = (x - mean)[:, None] - math.sqrt(2.0 * var) * z[None, :]
            pieces.append(_Piece(float(lm) + row_scale, nodes, axis_weights))
        return pieces
    nodes = x[:, None] - 2.0 * math.sqrt(t) * z[None, :]
    for log_amp, log_f in _component_log_factor(data, nodes):
        scale, weights = _normalize_rows(log_w[None, :] + log_f)
        pieces.append(_Piece(log_amp + scale, nodes, weights))
    return pieces


def _trap_pieces(data: InitialData, x: np.ndarray, t: float, radius: float, steps: int) -> list[_Piece]:
    half = radius * math.sqrt(4.0 * t)
    offsets = np.linspace(-half, half, steps + 1)
    h = 2.0 * half / steps
    trap = np.full(steps + 1, h)
    trap[0] = trap[-1] = 0.5 * h
    nodes = x[:, None] + offsets[None, :]
    log_kernel = np.log(trap) - 0.5 * math.log(4.0 * math.pi * t) - offsets**2 / (4.0 * t)
    pieces = []
    for log_amp, log_f in _component_log_factor(data, nodes):
        scale, weights = _normalize_rows(log_kernel[None, :] + log_f)
        pieces.append(_Piece(log_amp + scale, nodes, weights))
    return pieces


def _axis_table(pieces: list[_Piece], x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-piece log mass and normalized per-axis raw moments of ``x - y``."""
    log_mass, table = [], []
    for p in pieces:
        d = x[:, None] - p.nodes
        powers = d[:, None, :] ** np.arange(MAX_AXIS_DEGREE + 1)[None, :, None]
        s = np.einsum("ipq,iq->ip", powers, p.weights)
        log_mass.append(p.log_scale + float(np.sum(np.log(s[:, 0]))))
        table.append(s / s[:, :1])
    return np.array(log_mass), np.array(table)


def _monomial_value(log_mass: np.ndarray, table: np.ndarray, exponents: Sequence[int]) -> float:
    n = table.shape[1]
    exponents = tuple(int(a) for a in exponents)
    if len(exponents) != n or any(a < 0 or a > MAX_AXIS_DEGREE for a in exponents):
        raise InputError(f"monomial exponents must be {n} integers in [0, {MAX_AXIS_DEGREE}]")
    per_piece = np.prod(table[:, np.arange(n), list(exponents)], axis=1)
    w = np.exp(log_mass - logsumexp(log_mass))
    return float(w @ per_piece)


def _callable_value(pieces: list[_Piece], f: Callable[[np.ndarray], np.ndarray]) -> float:
    num, den, shifts = [], [], []
    for p in pieces:
        shape = p.nodes.shape[1:] * p.nodes.shape[0]
        size = math.prod(shape)
        axes = range(p.nodes.shape[0])
        acc = wsum = 0.0
        # stream the tensor grid so large n * steps never materialize at once
        for start in range(0, size, _CHUNK):
            idx = np.unravel_index(np.arange(start, min(start + _CHUNK, size)), shape)
            pts = np.stack([p.nodes[i, idx[i]] for i in axes], axis=1)
            w = np.prod([p.weights[i, idx[i]] for i in axes], axis=0)
            acc += float(np.dot(w, np.asarray(f(pts), dtype=float)))
            wsum += float(w.sum())
        num.append(acc)
        den.append(wsum)
        shifts.append(p.log_scale)
    shifts = np.array(shifts)
    scale = np.exp(shifts - shifts.max())
    return float(np.dot(scale, num) / np.dot(scale, den))


def _evaluate(pieces: list[_Piece], x: np.ndarray, f: Integrand) -> float:
    if callable(f):
        return _callable_value(pieces, f)
    log_mass, table = _axis_table(pieces, x)
    return _monomial_value(log_mass, table, f)


def _gh(spec: QuadratureSpec, data, x, t, order):
    return _gh_pieces(data, x, t, order, spec.adapt)


def _trap(spec: QuadratureSpec, data, x, t, steps):
    return _trap_pieces(data, x, t, spec.truncation_radius, steps)


def integrate_weighted(f: Integrand, data: InitialData, x, t: float, spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """Integrate ``f`` against ``nu_{x,t}``; returns ``(value, err_estimate)``.

    ``f`` is either a vectorized callable mapping ``(m, n)`` arrays of ``y``
    to ``(m,)`` values, or a tuple of per-axis exponents selecting the
    monomial ``prod_i (x_i - y_i)^a_i``.
    """
    spec = spec or QuadratureSpec()
    if spec.engine == "trapezoid":
        return trapezoid_oracle(f, data, x, t, spec)
    x, t = _check_inputs(data, x, t)
    value = _evaluate(_gh(spec, data, x, t, spec.order_per_axis), x, f)
    err = 0.0
    if spec.refine:
        finer = _evaluate(_gh(spec, data, x, t, spec.order_per_axis + REFINE_ORDER_STEP), x, f)
        err = abs(finer - value)
    return value, err


def trapezoid_oracle(f: Integrand, data: InitialData, x, t: float, spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """Composite trapezoid rule on the box ``|y_i - x_i| <= radius * sqrt(4t)``.

    The error estimate (with ``refine``) is the change against half as many
    steps, which overstates the error of the returned finer value.
    """
    spec = spec or QuadratureSpec(engine="trapezoid")
    x, t = _check_inputs(data, x, t)
    value = _evaluate(_trap(spec, data, x, t, spec.steps_per_axis), x, f)
    err = 0.0
    if spec.refine:
        coarse = _evaluate(_trap(spec, data, x, t, spec.steps_per_axis // 2), x, f)
        err = abs(coarse - value)
    return value, err


def _bundle(pieces: list[_Piece], x: np.ndarray) -> MomentBundle:
    log_mass, table = _axis_table(pieces, x)
    return MomentBundle.from_axis_moments(log_mass, table)


def quadrature_moments(data: InitialData, x, t: float, spec: QuadratureSpec | None = None) -> MomentBundle:
    """Moment bundle computed by the selected engine.

    ``err_estimate`` is the largest absolute change of any stored moment (and
    of ``u`` relative to itself) under refinement.
    """
    spec = spec or QuadratureSpec()
    x, t = _check_inputs(data, x, t)
    if spec.engine == "gauss_hermite":
        base, alt = spec.order_per_axis, spec.order_per_axis + REFINE_ORDER_STEP
        build = lambda level: _gh(spec, data, x, t, level)  # noqa: E731
    else:
        base, alt = spec.steps_per_axis, spec.steps_per_axis // 2
        build = lambda level: _trap(spec, data, x, t, level)  # noqa: E731
    mb = _bundle(build(base), x)
    if not spec.refine:
        return mb
    other = _bundle(build(alt), x)
    err = max(
        float(np.max(np.abs(mb.as_vector() - other.as_vector()))),
        abs(math.expm1(other.log_u - mb.log_u)),
    )
    return MomentBundle(
        mb.u_value, mb.m1, mb.m2, mb.m3_diag, mb.m4_diag, mb.m4_pair, err, mb.log_u
    )


def normalization(data: InitialData, x, t: float, spec: QuadratureSpec | None = None) -> float:
    """Integral of 1 against the normalized measure as computed by ``spec``.

    ``f = 1`` is the degree-zero monomial, so this uses the factorized path.
    """
    return integrate_weighted((0,) * data.n, data, x, t, spec)[0]
