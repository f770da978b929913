"""scikit-learn compatible wrappers.

Each estimator is configured with an initial datum and numerical engine and
consumes evaluation points as rows ``[x_1, ..., x_n, t]``, so the checks can
sit inside pipelines, grid searches and ``clone``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DimensionMismatch, InputError, NonPositiveTime
from .initial_data import T_MIN, InitialData, validate
from .inequalities import (
    CheckReport,
    FourthOrderParams,
    SecondOrderParams,
    check_fourth_order,
    check_second_order,
    moments,
)
from .kernel_moments import ratios_from_moments
from .quadrature import QuadratureSpec


def check_points(X, n: int) -> np.ndarray:
    """Validate an ``(m, n + 1)`` array of ``[x..., t]`` rows."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != n + 1:
        raise DimensionMismatch(f"expected {n + 1} columns ([x_1..x_{n}, t]), got {X.shape[1]}")
    if np.any(X[:, -1] < T_MIN):
        raise NonPositiveTime(f"time column must be >= {T_MIN:g}")
    return X


class _EngineMixin:
    def _quadrature_spec(self) -> QuadratureSpec | None:
        if self.engine == "closed_form":
            return None
        if self.engine not in ("gauss_hermite", "trapezoid"):
            raise InputError(f"unknown engine {self.engine!r}")
        return QuadratureSpec(
            engine=self.engine,
            order_per_axis=self.quad_order,
            truncation_radius=self.trap_radius,
            steps_per_axis=self.trap_steps,
            refine=self.refine,
        )

    def _fit_data(self):
        if self.initial_data is None:
            raise InputError("initial_data must be set before fit")
        self.data_: InitialData = validate(self.initial_data)
        self.quadrature_ = self._quadrature_spec()
        self.n_features_in_ = self.data_.n + 1
        return self

    def _points(self, X):
        check_is_fitted(self, "data_")
        return check_points(X, self.data_.n)


class HeatFlowMoments(_EngineMixin, TransformerMixin, BaseEstimator):
    """Maps ``[x, t]`` rows to ``log u`` and the heat-kernel moments of ``x - y``."""

    def __init__(self, initial_data=None, engine="closed_form", quad_order=40, trap_radius=8.0, trap_steps=512, refine=True):
        self.initial_data = initial_data
        self.engine = engine
        self.quad_order = quad_order
        self.trap_radius = trap_radius
        self.trap_steps = trap_steps
        self.refine = refine

    def fit(self, X=None, y=None):
        return self._fit_data()

    def transform(self, X):
        X = self._points(X)
        n = self.data_.n
        rows = []
        for row in X:
            mb = moments(self.data_, row[:n], row[n], self.quadrature_)
            rows.append(np.concatenate([[mb.log_u], mb.as_vector(), [mb.err_estimate]]))
        return np.array(rows)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "data_")
        n = self.data_.n
        names = ["log_u"] + [f"m1_{i}" for i in range(n)]
        names += [f"m2_{i}{j}" for i in range(n) for j in range(i, n)]
        names += [f"m3_{i}" for i in range(n)] + [f"m4_{i}" for i in range(n)]
        names += [f"m4pair_{i}{j}" for i in range(n) for j in range(i + 1, n)]
        return np.array(names + ["err"], dtype=object)


class DerivativeRatioTransformer(HeatFlowMoments):
    """Maps ``[x, t]`` rows to every derivative ratio ``(d^a u) / u``."""

    def transform(self, X):
        X = self._points(X)
        n = self.data_.n
        out = []
        for row in X:
            r = ratios_from_moments(moments(self.data_, row[:n], row[n], self.quadrature_), row[n], n)
            out.append([v for _, _, v in r.entries()])
        return np.array(out)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "data_")
        n = self.data_.n
        probe = ratios_from_moments(moments(self.data_, np.zeros(n), 1.0), 1.0, n)
        return np.array([label for label, _, _ in probe.entries()], dtype=object)


class _InequalityEstimator(_EngineMixin, BaseEstimator):
    def fit(self, X=None, y=None):
        self._fit_data()
        self.params_ = self._params()
        return self

    def reports(self, X) -> list[CheckReport]:
        X = self._points(X)
        n = self.data_.n
        return [self._check(row[:n], row[n]) for row in X]

    def decision_function(self, X) -> np.ndarray:
        """Slack (left minus right side) per row."""
        return np.array([r.slack for r in self.reports(X)])

    def predict(self, X) -> np.ndarray:
        """True where the inequality holds within tolerance."""
        return np.array([r.slack >= -r.tolerance for r in self.reports(X)])

    def score(self, X, y=None) -> float:
        return float(np.min(self.decision_function(X)))


class SecondOrderLiYau(_InequalityEstimator):
    """Second-order Li-Yau type inequality with coefficients ``alpha, beta, gamma``."""

    def __init__(self, initial_data=None, alpha=0.0, beta=0.0, gamma=1.0, engine="closed_form",
                 quad_order=40, trap_radius=8.0, trap_steps=512, refine=True):
        self.initial_data = initial_data
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.engine = engine
        self.quad_order = quad_order
        self.trap_radius = trap_radius
        self.trap_steps = trap_steps
        self.refine = refine

    def _params(self):
        return SecondOrderParams(self.alpha, self.beta, self.gamma)

    def _check(self, x, t):
        return check_second_order(self.data_, x, t, self.params_, self.quadrature_)


class FourthOrderLiYau(_InequalityEstimator):
    """Fourth-order Li-Yau type inequality with coefficients ``k1..k4``."""

    def __init__(self, initial_data=None, k1=0.0, k2=0.0, k3=0.0, k4=0.0, variant="rederived",
                 pair_aggregate="squared_sum", allow_inadmissible=False, engine="closed_form",
                 quad_order=40, trap_radius=8.0, trap_steps=512, refine=True):
        self.initial_data = initial_data
        self.k1 = k1
        self.k2 = k2
        self.k3 = k3
        self.k4 = k4
        self.variant = variant
        self.pair_aggregate = pair_aggregate
        self.allow_inadmissible = allow_inadmissible
        self.engine = engine
        self.quad_order = quad_order
        self.trap_radius = trap_radius
        self.trap_steps = trap_steps
        self.refine = refine

    def _params(self):
        return FourthOrderParams(self.k1, self.k2, self.k3, self.k4, self.variant)

    def _check(self, x, t):
        return check_fourth_order(
            self.data_, x, t, self.params_, self.quadrature_, self.pair_aggregate, self.allow_inadmissible
        )
