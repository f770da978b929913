"""Derivative ratios of the heat flow and their independent oracles.

Every ratio ``(d^a u) / u`` is an affine combination of the moments stored in
a :class:`~liyau.initial_data.MomentBundle`; :func:`ratios_from_moments`
assembles all of them from one bundle.  :func:`finite_difference_ratio`
recomputes them from values of ``u`` alone, evaluated in extended precision
so that fourth differences are limited by truncation and not by rounding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .errors import InputError, NonPositiveTime, StepTooSmall
from .initial_data import InitialData, MomentBundle, as_point, check_time

# (offsets, integer weights, common denominator, accuracy order) of the 1-D
# central stencils; integer weights keep the extended-precision sums free of
# rounding in the coefficients, so constant data difference to exactly zero
_STENCILS = {
    0: ((0,), (1,), 1, None),
    1: ((-2, -1, 1, 2), (1, -8, 8, -1), 12, 4),
    2: ((-2, -1, 0, 1, 2), (-1, 16, -30, 16, -1), 12, 4),
    3: ((-2, -1, 1, 2), (-1, 2, -2, 1), 2, 2),
    4: ((-2, -1, 0, 1, 2), (1, -4, 6, -4, 1), 1, 2),
}
DEFAULT_DPS = 40


@dataclass(frozen=True, eq=False)
class DerivativeRatios:
    grad: np.ndarray
    hess: np.ndarray
    third_diag: np.ndarray
    fourth_diag: np.ndarray
    fourth_pair: np.ndarray
    t: float
    n: int

    def li_yau_gap(self) -> float:
        """``trace(hess) - |grad|^2 + n/(2t)``; nonnegative for every solution."""
        return laplacian_log_u(self) + self.n / (2.0 * self.t)

    def entries(self) -> Iterator[tuple[str, tuple[int, ...], float]]:
        """Yield ``(label, derivative multi-index, value)`` for each stored ratio."""
        n = self.n
        eye = np.eye(n, dtype=int)
        for i in range(n):
            yield f"grad[{i}]", tuple(eye[i]), float(self.grad[i])
        for i in range(n):
            for j in range(i, n):
                yield f"hess[{i}][{j}]", tuple(eye[i] + eye[j]), float(self.hess[i, j])
        for i in range(n):
            yield f"third_diag[{i}]", tuple(3 * eye[i]), float(self.third_diag[i])
        for i in range(n):
            yield f"fourth_diag[{i}]", tuple(4 * eye[i]), float(self.fourth_diag[i])
        for i, j in itertools.combinations(range(n), 2):
            yield f"fourth_pair[{i}][{j}]", tuple(2 * eye[i] + 2 * eye[j]), float(self.fourth_pair[i, j])

    def to_dict(self) -> dict:
        return {
            "grad": self.grad.tolist(),
            "hess": self.hess.tolist(),
            "third_diag": self.third_diag.tolist(),
            "fourth_diag": self.fourth_diag.tolist(),
            "fourth_pair": self.fourth_pair.tolist(),
        }


def ratios_from_moments(mb: MomentBundle, t: float, n: int | None = None) -> DerivativeRatios:
    """All derivative ratios of ``u`` at one point from its moment bundle."""
    t = check_time(t)
    n = mb.n if n is None else int(n)
    if n != mb.n:
        raise InputError(f"bundle has dimension {mb.n}, expected {n}")
    grad = -mb.m1 / (2.0 * t)
    hess = mb.m2 / (4.0 * t * t)
    hess[np.diag_indices(n)] -= 1.0 / (2.0 * t)
    third = (6.0 * t * mb.m1 - mb.m3_diag) / (8.0 * t**3)
    m2d = np.diag(mb.m2)
    t4 = 16.0 * t**4
    fourth = (12.0 * t * t - 12.0 * t * m2d + mb.m4_diag) / t4
    pair = (mb.m4_pair - 2.0 * t * (m2d[:, None] + m2d[None, :]) + 4.0 * t * t) / t4
    np.fill_diagonal(pair, 0.0)
    return DerivativeRatios(grad, hess, third, fourth, pair, t, n)


def laplacian_log_u(r: DerivativeRatios) -> float:
    return float(np.trace(r.hess) - r.grad @ r.grad)


def fourth_diag_split(m2_ii: float, m4_ii: float, t: float) -> float:
    """Fourth-diagonal ratio written as a moment part plus ``3/(4 t^2)``."""
    return (-12.0 * t * m2_ii + m4_ii) / (16.0 * t**4) + 0.75 / t**2


def _u_mp(data: InitialData, x: Sequence, t) -> mpmath.mpf:
    n = data.n
    u = mpmath.mpf(data.constant_offset)
    for c in data.components:
        d2 = mpmath.fsum((mpmath.mpf(xi) - mpmath.mpf(mi)) ** 2 for xi, mi in zip(x, c.center))
        if c.is_point_mass:
            u += c.weight * (4 * mpmath.pi * t) ** (-mpmath.mpf(n) / 2) * mpmath.exp(-d2 / (4 * t))
        else:
            total = mpmath.mpf(c.sigma) ** 2 + 2 * t
            u += c.weight * (c.sigma**2 / total) ** (mpmath.mpf(n) / 2) * mpmath.exp(-d2 / (2 * total))
    return u


def default_step(t: float) -> float:
    return 1e-3 * max(math.sqrt(t), 1.0)


def _fd_derivative(data: InitialData, x: np.ndarray, t, multi_index: tuple[int, ...], h) -> tuple[mpmath.mpf, int]:
    stencils = [_STENCILS[a] for a in multi_index]
    acc = min(s[3] for s in stencils if s[3] is not None)
    denom = math.prod(s[2] for s in stencils)
    total = mpmath.mpf(0)
    for combo in itertools.product(*(zip(s[0], s[1]) for s in stencils)):
        weight = math.prod(c for _, c in combo)
        shifted = [mpmath.mpf(xi) + off * h for xi, (off, _) in zip(x, combo)]
        total += weight * _u_mp(data, shifted, t)
    return total / (denom * h ** sum(multi_index)), acc


def finite_difference_ratio(
    data: InitialData,
    x,
    t: float,
    multi_index: Sequence[int],
    h: float | None = None,
    dps: int = DEFAULT_DPS,
) -> float:
    """``(d^a u)(x, t) / u(x, t)`` from central differences of ``u``.

    Stencils are 4th-order accurate for first and second derivatives and
    2nd-order for third and fourth; one Richardson step combines ``h`` and
    ``h/2``.  ``u`` is evaluated from the convolution formula at ``dps``
    decimal digits.
    """
    t = check_time(t)
    x = as_point(x, data.n)
    multi_index = tuple(int(a) for a in multi_index)
    if len(multi_index) == 1 and data.n > 1:
        multi_index = multi_index + (0,) * (data.n - 1)
    if len(multi_index) != data.n or any(a < 0 for a in multi_index):
        raise InputError(f"multi_index must have {data.n} nonnegative entries")
    if not 1 <= sum(multi_index) <= 4 or max(multi_index) > 4:
        raise InputError("derivative order must be between 1 and 4")
    h = default_step(t) if h is None else float(h)
    if h < 1e-6 * math.sqrt(t):
        raise StepTooSmall(f"step {h:g} is below 1e-6*sqrt(t)")
    with mpmath.workdps(dps):
        hm, tm = mpmath.mpf(h), mpmath.mpf(t)
        coarse, p = _fd_derivative(data, x, tm, multi_index, hm)
        fine, _ = _fd_derivative(data, x, tm, multi_index, hm / 2)
        extrapolated = (2**p * fine - coarse) / (2**p - 1)
        return float(extrapolated / _u_mp(data, x, tm))


def finite_difference_ratios(data: InitialData, x, t: float, h: float | None = None, dps: int = DEFAULT_DPS) -> DerivativeRatios:
    """Every ratio held by :class:`DerivativeRatios`, by finite differences."""
    n = data.n
    t = check_time(t)
    fd = lambda idx: finite_difference_ratio(data, x, t, idx, h, dps)  # noqa: E731
    eye = np.eye(n, dtype=int)
    grad = np.array([fd(eye[i]) for i in range(n)])
    hess = np.zeros((n, n))
    pair = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            hess[i, j] = hess[j, i] = fd(eye[i] + eye[j])
            if i != j:
                pair[i, j] = pair[j, i] = fd(2 * eye[i] + 2 * eye[j])
    third = np.array([fd(3 * eye[i]) for i in range(n)])
    fourth = np.array([fd(4 * eye[i]) for i in range(n)])
    return DerivativeRatios(grad, hess, third, fourth, pair, t, n)


def heat_residual(data: InitialData, x, t: float, h: float = 1e-3, dps: int = DEFAULT_DPS) -> float:
    """``u_t - Laplacian(u)`` at ``(x, t)`` from central differences of ``u``.

    Both the central time difference and the spatial stencils are combined
    over ``h`` and ``h/2`` by one Richardson step.
    """
    t = check_time(t)
    x = as_point(x, data.n)
    h = float(h)
    if h < 1e-6 * math.sqrt(t):
        raise StepTooSmall(f"step {h:g} is below 1e-6*sqrt(t)")
    if t - h <= 0:
        raise NonPositiveTime("heat_residual needs t - h > 0")
    eye = np.eye(data.n, dtype=int)
    with mpmath.workdps(dps):
        hm, tm = mpmath.mpf(h), mpmath.mpf(t)
        central = lambda k: (_u_mp(data, x, tm + k) - _u_mp(data, x, tm - k)) / (2 * k)  # noqa: E731
        u_t = (4 * central(hm / 2) - central(hm)) / 3
        lap = mpmath.mpf(0)
        for i in range(data.n):
            coarse, p = _fd_derivative(data, x, tm, tuple(2 * eye[i]), hm)
            fine, _ = _fd_derivative(data, x, tm, tuple(2 * eye[i]), hm / 2)
            lap += (2**p * fine - coarse) / (2**p - 1)
        return float(u_t - lap)


def heat_value(data: InitialData, x, t: float, dps: int = DEFAULT_DPS) -> float:
    with mpmath.workdps(dps):
        return float(_u_mp(data, as_point(x, data.n), mpmath.mpf(check_time(t))))


def pair_identity(z) -> tuple[float, float]:
    """Both sides of ``sum_{i != j} (z_i^2 + z_j^2) = 2 (n - 1) |z|^2``."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    sq = z * z
    lhs = math.fsum(sq[i] + sq[j] for i in range(n) for j in range(n) if i != j)
    return lhs, 2.0 * (n - 1) * math.fsum(sq)


def jensen_gap(values, probs, p: float) -> float:
    """``E|f|^p - (E|f|)^p`` for a discrete probability vector; never negative for ``p >= 1``."""
    if p < 1:
        raise InputError("Jensen's inequality needs p >= 1")
    f = np.abs(np.asarray(values, dtype=float))
    g = np.asarray(probs, dtype=float)
    if np.any(g < 0) or not math.isclose(g.sum(), 1.0, rel_tol=1e-12):
        raise InputError("probs must be a probability vector")
    return float(np.dot(f**p, g) - np.dot(f, g) ** p)
