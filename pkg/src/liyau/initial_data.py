"""Initial conditions and their exact heat flow.

The initial datum is ``g(y) = c + sum_k w_k exp(-|y - mu_k|^2 / (2 sigma_k^2))``
with ``c >= 0``.  A component with ``sigma = 0`` is a point mass ``w delta_mu``;
such data have exact heat-flow moments but cannot be evaluated pointwise.

Under the normalized heat-kernel measure ``nu_{x,t}`` every piece of ``g``
makes ``x - y`` Gaussian with isotropic variance, so all moments reduce to
per-axis Gaussian raw moments mixed by posterior weights.  The mixing is done
in log space to keep far-away components finite.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (
    ClosedFormOnlyData,
    DimensionMismatch,
    NegativeSigma,
    NonPositiveTime,
    NonPositiveWeight,
    VanishingData,
)

T_MIN = 1e-8
MAX_AXIS_DEGREE = 4


def check_time(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < T_MIN:
        raise NonPositiveTime(f"t must be >= {T_MIN:g}, got {t!r}")
    return t


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    center: tuple[float, ...]
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise NonPositiveWeight(f"component weight must be positive, got {self.weight!r}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise NegativeSigma(f"component sigma must be >= 0, got {self.sigma!r}")
        if not all(math.isfinite(c) for c in self.center):
            raise DimensionMismatch("component center must be finite")

    @property
    def is_point_mass(self) -> bool:
        return self.sigma == 0.0


@dataclass(frozen=True)
class InitialData:
    """Nonnegative initial datum: constant offset plus a Gaussian mixture."""

    n: int
    constant_offset: float = 0.0
    components: tuple[GaussianComponent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, GaussianComponent) else GaussianComponent(**c)
            for c in self.components
        )
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "constant_offset", float(self.constant_offset))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DimensionMismatch(f"dimension n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (self.constant_offset >= 0 and math.isfinite(self.constant_offset)):
            raise VanishingData(f"constant_offset must be >= 0, got {self.constant_offset!r}")
        if self.constant_offset == 0 and not comps:
            raise VanishingData("initial data vanishes identically")
        for c in comps:
            if len(c.center) != self.n:
                raise DimensionMismatch(
                    f"component center has {len(c.center)} coordinates, expected {self.n}"
                )

    @property
    def closed_form_only(self) -> bool:
        return any(c.is_point_mass for c in self.components)

    def scaled(self, factor: float) -> "InitialData":
        return InitialData(
            self.n,
            self.constant_offset * factor,
            tuple(GaussianComponent(c.weight * factor, c.center, c.sigma) for c in self.components),
        )

    def translated(self, shift: Sequence[float]) -> "InitialData":
        shift = np.asarray(shift, dtype=float)
        return InitialData(
            self.n,
            self.constant_offset,
            tuple(
                GaussianComponent(c.weight, tuple(np.asarray(c.center) + shift), c.sigma)
                for c in self.components
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "constant_offset": self.constant_offset,
            "components": [
                {"weight": c.weight, "center": list(c.center), "sigma": c.sigma}
                for c in self.components
            ],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "InitialData":
        try:
            n = raw["n"]
            comps = [
                GaussianComponent(
                    weight=c["weight"], center=tuple(c["center"]), sigma=c.get("sigma", 1.0)
                )
                for c in raw.get("components", [])
            ]
            offset = raw.get("constant_offset", 0.0)
        except (KeyError, TypeError) as exc:
            raise DimensionMismatch(f"malformed initial data: {exc!r}") from exc
        return cls(n=n, constant_offset=offset, components=tuple(comps))


def validate(raw: InitialData | Mapping[str, Any]) -> InitialData:
    """Return checked :class:`InitialData` from a mapping or an existing instance."""
    if isinstance(raw, InitialData):
        return raw
    return InitialData.from_dict(raw)


def load_scenario(path) -> InitialData:
    with open(path) as fh:
        return InitialData.from_dict(json.load(fh))


def dumps_scenario(data: InitialData) -> str:
    return json.dumps(data.to_dict(), indent=2, sort_keys=True) + "\n"


def as_point(x, n: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (n,):
        raise DimensionMismatch(f"point must have {n} coordinates, got shape {x.shape}")
    return x


def eval_g(data: InitialData, y) -> np.ndarray | float:
    """Evaluate ``g`` at one point ``(n,)`` or a batch ``(m, n)``."""
    if data.closed_form_only:
        raise ClosedFormOnlyData("point masses cannot be evaluated pointwise")
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[1] != data.n:
        raise DimensionMismatch(f"expected points with {data.n} coordinates")
    out = np.full(y.shape[0], data.constant_offset)
    for c in data.components:
        d2 = np.sum((y - np.asarray(c.center)) ** 2, axis=1)
        out += c.weight * np.exp(-d2 / (2.0 * c.sigma**2))
    return float(out[0]) if single else out


@dataclass(frozen=True)
class PieceLaws:
    """Per-piece law of ``x - y`` under the heat-kernel measure.

    ``log_mass[k]`` is the log of piece ``k``'s contribution to ``u(x, t)``;
    given the piece, the coordinates of ``x - y`` are independent normals with
    means ``mean[k]`` and common variance ``var[k]``.
    """

    log_mass: np.ndarray
    mean: np.ndarray
    var: np.ndarray


def piece_laws(data: InitialData, x, t: float) -> PieceLaws:
    t = check_time(t)
    x = as_point(x, data.n)
    n = data.n
    log_mass, means, variances = [], [], []
    if data.constant_offset > 0:
        log_mass.append(math.log(data.constant_offset))
        means.append(np.zeros(n))
        variances.append(2.0 * t)
    for c in data.components:
        diff = x - np.asarray(c.center)
        d2 = float(diff @ diff)
        if c.is_point_mass:
            log_mass.append(math.log(c.weight) - 0.5 * n * math.log(4.0 * math.pi * t) - d2 / (4.0 * t))
            means.append(diff)
            variances.append(0.0)
        else:
            s2 = c.sigma**2
            total = s2 + 2.0 * t
            log_mass.append(math.log(c.weight) + 0.5 * n * math.log(s2 / total) - d2 / (2.0 * total))
            means.append(diff * (2.0 * t / total))
            variances.append(2.0 * t * s2 / total)
    return PieceLaws(np.array(log_mass), np.array(means), np.array(variances))


def gaussian_raw_moments(mean, var) -> np.ndarray:
    """Raw moments of order 0..4 of N(mean, var), stacked on a new last axis."""
    m = np.asarray(mean, dtype=float)
    v = np.broadcast_to(np.asarray(var, dtype=float), m.shape)
    m2 = m * m
    return np.stack(
        [np.ones_like(m), m, m2 + v, m * (m2 + 3.0 * v), m2 * m2 + 6.0 * m2 * v + 3.0 * v * v],
        axis=-1,
    )


def heat_log_solution(data: InitialData, x, t: float) -> float:
    return float(logsumexp(piece_laws(data, x, t).log_mass))


def heat_solution(data: InitialData, x, t: float) -> float:
    """Exact ``u(x, t)`` of the heat flow started from ``data``."""
    return math.exp(heat_log_solution(data, x, t))


@dataclass(frozen=True, eq=False)
class MomentBundle:
    """``u(x, t)`` and the moments of ``x - y`` under the heat-kernel measure.

    ``m4_pair`` holds ``E[(x_i-y_i)^2 (x_j-y_j)^2]`` off the diagonal and zeros
    on it.  ``log_u`` is carried so that ``u`` can be recovered when it
    underflows.
    """

    u_value: float
    m1: np.ndarray
    m2: np.ndarray
    m3_diag: np.ndarray
    m4_diag: np.ndarray
    m4_pair: np.ndarray
    err_estimate: float = 0.0
    log_u: float = float("nan")

    @property
    def n(self) -> int:
        return self.m1.shape[0]

    def as_vector(self) -> np.ndarray:
        """All stored moments flattened (``u`` excluded)."""
        iu = np.triu_indices(self.n, 1)
        return np.concatenate(
            [self.m1, self.m2[np.triu_indices(self.n)], self.m3_diag, self.m4_diag, self.m4_pair[iu]]
        )

    @classmethod
    def from_axis_moments(cls, log_mass, table, err_estimate: float = 0.0) -> "MomentBundle":
        """Mix per-piece axis moments.

        ``table[k, i, p]`` is the (normalized) order-``p`` raw moment of
        coordinate ``i`` under piece ``k``; pieces factorize across axes.
        """
        log_mass = np.asarray(log_mass, dtype=float)
        table = np.asarray(table, dtype=float)
        log_u = float(logsumexp(log_mass))
        w = np.exp(log_mass - log_u)
        first, second = table[:, :, 1], table[:, :, 2]
        m1 = w @ first
        m2 = np.einsum("k,ki,kj->ij", w, first, first)
        m2 = 0.5 * (m2 + m2.T)  # exact symmetry regardless of summation order
        np.fill_diagonal(m2, w @ second)
        m4_pair = np.einsum("k,ki,kj->ij", w, second, second)
        m4_pair = 0.5 * (m4_pair + m4_pair.T)
        np.fill_diagonal(m4_pair, 0.0)
        return cls(
            u_value=math.exp(log_u),
            m1=m1,
            m2=m2,
            m3_diag=w @ table[:, :, 3],
            m4_diag=w @ table[:, :, 4],
            m4_pair=m4_pair,
            err_estimate=float(err_estimate),
            log_u=log_u,
        )


def closed_form_moments(data: InitialData, x, t: float) -> MomentBundle:
    """Exact moment bundle for Gaussian-mixture (and point-mass) data."""
    laws = piece_laws(data, x, t)
    table = gaussian_raw_moments(laws.mean, laws.var[:, None])
    return MomentBundle.from_axis_moments(laws.log_mass, table, 0.0)


def closed_form_monomial(data: InitialData, x, t: float, exponents: Sequence[int]) -> float:
    """``E[prod_i (x_i - y_i)^a_i]`` under the heat-kernel measure, exactly."""
    exponents = tuple(int(a) for a in exponents)
    if len(exponents) != data.n:
        raise DimensionMismatch(f"expected {data.n} exponents")
    if any(a < 0 or a > MAX_AXIS_DEGREE for a in exponents):
        raise ValueError(f"per-axis exponents must lie in [0, {MAX_AXIS_DEGREE}]")
    laws = piece_laws(data, x, t)
    table = gaussian_raw_moments(laws.mean, laws.var[:, None])
    per_piece = np.prod(table[:, np.arange(data.n), exponents], axis=1)
    w = np.exp(laws.log_mass - logsumexp(laws.log_mass))
    return float(w @ per_piece)
