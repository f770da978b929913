import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from helpers import constant, gaussian, point_mass, scenario_set
from liyau import (
    ClosedFormOnlyData,
    DimensionTooLarge,
    InputError,
    NonPositiveTime,
    OrderTooLarge,
    QuadratureSpec,
    closed_form_moments,
    closed_form_monomial,
    gauss_hermite_rule,
    integrate_weighted,
    quadrature_moments,
    trapezoid_oracle,
)
from liyau.quadrature import normalization

SQRT_PI = math.sqrt(math.pi)
GH = QuadratureSpec()
TRAP = QuadratureSpec(engine="trapezoid")


class TestRule:
    def test_order_one(self):
        z, w = gauss_hermite_rule(1)
        assert z.tolist() == [0.0]
        assert w[0] == pytest.approx(SQRT_PI, rel=1e-15)

    def test_order_two_second_moment(self):
        z, w = gauss_hermite_rule(2)
        assert np.dot(w, z**2) == pytest.approx(SQRT_PI / 2, rel=1e-14)

    def test_order_five_fourth_moment(self):
        z, w = gauss_hermite_rule(5)
        assert np.dot(w, z**4) == pytest.approx(0.75 * SQRT_PI, rel=1e-14)

    @pytest.mark.parametrize("order", [1, 2, 3, 7, 20, 40, 64, 128])
    def test_exactness(self, order):
        z, w = gauss_hermite_rule(order)
        for d in range(2 * order):
            exact = 0.0 if d % 2 else gamma_fn((d + 1) / 2)
            got = float(np.dot(w, z**d))
            if exact == 0.0:
                # odd moments: compare against the size of the summed terms
                assert abs(got) <= 1e-12 * float(np.dot(w, np.abs(z) ** d)) + 1e-300
            else:
                assert got == pytest.approx(exact, rel=1e-12)

    def test_cap(self):
        with pytest.raises(OrderTooLarge):
            gauss_hermite_rule(129)
        with pytest.raises(OrderTooLarge):
            QuadratureSpec(order_per_axis=125)

    def test_tables_are_read_only(self):
        z, _ = gauss_hermite_rule(6)
        with pytest.raises(ValueError):
            z[0] = 1.0


class TestSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [{"order_per_axis": 1}, {"steps_per_axis": 4}, {"truncation_radius": 3.0}, {"engine": "simpson"}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            QuadratureSpec(**kwargs)


class TestIntegrateWeighted:
    @pytest.mark.parametrize("spec", [GH, QuadratureSpec(adapt=False), TRAP, QuadratureSpec(order_per_axis=4, refine=False)])
    def test_normalization(self, spec):
        for d, x, t in scenario_set(9):
            assert normalization(d, x, t, spec) == pytest.approx(1.0, abs=1e-12)

    def test_normalization_callable(self):
        spec = QuadratureSpec(engine="trapezoid", steps_per_axis=64, refine=False)
        for d, x, t in scenario_set(6):
            for s in (spec, QuadratureSpec(order_per_axis=12)):
                value, _ = integrate_weighted(lambda y: np.ones(len(y)), d, x, t, s)
                assert value == pytest.approx(1.0, abs=1e-12)

    def test_odd_moment_vanishes(self):
        value, _ = integrate_weighted((1, 0), constant(2), [0.3, 0.4], 0.8)
        assert abs(value) < 1e-14

    def test_second_moment_constant(self):
        value, _ = integrate_weighted((2,), constant(1), [0.0], 0.5)
        assert value == pytest.approx(1.0, rel=1e-13)
        assert closed_form_moments(constant(1), [0.0], 0.5).m2[0, 0] == pytest.approx(1.0, rel=1e-15)

    def test_callable_matches_monomial(self):
        d, x, t = scenario_set(2)[1]
        spec = QuadratureSpec(order_per_axis=24)
        xv = np.asarray(x)
        by_callable, _ = integrate_weighted(lambda y: (xv[0] - y[:, 0]) ** 2 * (xv[1] - y[:, 1]), d, x, t, spec)
        by_index, _ = integrate_weighted((2, 1), d, x, t, spec)
        assert by_callable == pytest.approx(by_index, rel=1e-12, abs=1e-13)

    def test_refine_reports_error(self):
        d, x, t = scenario_set(1)[0]
        _, err = integrate_weighted((4,), d, x, t, QuadratureSpec(order_per_axis=3))
        assert err > 0
        _, err = integrate_weighted((4,), d, x, t, QuadratureSpec(order_per_axis=3, refine=False))
        assert err == 0

    def test_narrow_gaussian_needs_adaptive_nodes(self):
        d = gaussian(1, sigma=0.01, center=(0.2,))
        exact = closed_form_monomial(d, [0.0], 1.0, (2,))
        adaptive, _ = integrate_weighted((2,), d, [0.0], 1.0, GH)
        assert adaptive == pytest.approx(exact, rel=1e-12)

    def test_point_mass_rejected(self):
        for fn in (integrate_weighted, trapezoid_oracle):
            with pytest.raises(ClosedFormOnlyData):
                fn((0,), point_mass(1), [0.0], 1.0)

    def test_dimension_cap(self):
        with pytest.raises(DimensionTooLarge):
            integrate_weighted((0,) * 5, constant(5), np.zeros(5), 1.0)

    def test_time_checked(self):
        with pytest.raises(NonPositiveTime):
            integrate_weighted((0,), constant(1), [0.0], -1.0)


class TestTrapezoid:
    def test_normalization_coarse(self):
        spec = QuadratureSpec(engine="trapezoid", truncation_radius=6.0, steps_per_axis=256)
        for d, x, t in scenario_set(6):
            assert trapezoid_oracle((0,) * d.n, d, x, t, spec)[0] == pytest.approx(1.0, abs=1e-6)

    def test_fourth_moment_matches_gauss_hermite(self):
        for d, x, t in scenario_set(9):
            exps = (4,) + (0,) * (d.n - 1)
            a, _ = trapezoid_oracle(exps, d, x, t, TRAP)
            b, _ = integrate_weighted(exps, d, x, t, GH)
            assert a == pytest.approx(b, abs=1e-6)


def test_bundles_agree_with_closed_form():
    for d, x, t in scenario_set(12):
        ref = closed_form_moments(d, x, t)
        for spec in (GH, TRAP):
            mb = quadrature_moments(d, x, t, spec)
            tol = max(1e-6, 3 * mb.err_estimate)
            np.testing.assert_allclose(mb.as_vector(), ref.as_vector(), rtol=0, atol=tol)
            assert mb.log_u == pytest.approx(ref.log_u, abs=1e-10)
