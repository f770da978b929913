import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import constant, gaussian, point_mass, scenario_set
from liyau import (
    ClosedFormOnlyData,
    DimensionMismatch,
    GaussianComponent,
    InitialData,
    NegativeSigma,
    NonPositiveTime,
    NonPositiveWeight,
    VanishingData,
    closed_form_moments,
    closed_form_monomial,
    eval_g,
    heat_solution,
    validate,
)
from liyau.initial_data import dumps_scenario, load_scenario


class TestValidate:
    def test_constant_is_valid(self):
        d = validate({"n": 1, "constant_offset": 1, "components": []})
        assert d.n == 1 and not d.closed_form_only

    def test_vanishing_rejected(self):
        with pytest.raises(VanishingData):
            validate({"n": 2, "constant_offset": 0, "components": []})

    def test_point_mass_is_closed_form_only(self):
        d = validate({"n": 1, "constant_offset": 0, "components": [{"weight": 1, "center": [0], "sigma": 0}]})
        assert d.closed_form_only

    @pytest.mark.parametrize(
        "comp, exc",
        [
            ({"weight": 0.0, "center": [0.0], "sigma": 1.0}, NonPositiveWeight),
            ({"weight": -1.0, "center": [0.0], "sigma": 1.0}, NonPositiveWeight),
            ({"weight": 1.0, "center": [0.0], "sigma": -0.1}, NegativeSigma),
            ({"weight": 1.0, "center": [0.0, 1.0], "sigma": 1.0}, DimensionMismatch),
        ],
    )
    def test_bad_components(self, comp, exc):
        with pytest.raises(exc):
            validate({"n": 1, "constant_offset": 0, "components": [comp]})

    def test_negative_offset(self):
        with pytest.raises(VanishingData):
            InitialData(1, -1.0, (GaussianComponent(1.0, (0.0,), 1.0),))

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            validate({"n": 0, "constant_offset": 1})


class TestEvalG:
    def test_constant(self):
        assert eval_g(constant(3), [0.3, -2.0, 5.0]) == 1.0

    def test_center(self):
        assert eval_g(gaussian(1), [0.0]) == 1.0

    def test_two_e_inverse(self):
        d = gaussian(2, weight=2.0)
        assert eval_g(d, [1.0, 1.0]) == pytest.approx(2 * math.exp(-1), rel=1e-15)

    def test_batch(self):
        d = gaussian(2)
        out = eval_g(d, np.zeros((4, 2)))
        assert out.shape == (4,) and np.all(out == 1.0)

    def test_point_mass_has_no_pointwise_value(self):
        with pytest.raises(ClosedFormOnlyData):
            eval_g(point_mass(1), [0.0])


class TestClosedForm:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("t", [0.25, 1.0, 3.0])
    def test_constant_moments(self, n, t):
        mb = closed_form_moments(constant(n), np.linspace(-1, 1, n), t)
        np.testing.assert_allclose(mb.m1, 0.0, atol=1e-15)
        np.testing.assert_allclose(mb.m2, 2 * t * np.eye(n), atol=1e-14)
        np.testing.assert_allclose(mb.m3_diag, 0.0, atol=1e-14)
        np.testing.assert_allclose(mb.m4_diag, 12 * t * t, rtol=1e-14)
        off = ~np.eye(n, dtype=bool)
        np.testing.assert_allclose(mb.m4_pair[off], 4 * t * t, rtol=1e-14)
        assert np.all(np.diag(mb.m4_pair) == 0)
        assert mb.u_value == pytest.approx(1.0, rel=1e-15)

    def test_point_mass_value(self):
        t, n = 0.7, 2
        d = point_mass(n, (0.5, -0.2))
        x = np.array([1.0, 0.3])
        expected = (4 * math.pi * t) ** (-n / 2) * math.exp(-np.sum((x - [0.5, -0.2]) ** 2) / (4 * t))
        assert heat_solution(d, x, t) == pytest.approx(expected, rel=1e-14)
        mb = closed_form_moments(d, x, t)
        np.testing.assert_allclose(mb.m1, x - [0.5, -0.2], rtol=1e-14)

    def test_single_gaussian_value(self):
        sigma, t = 0.8, 0.6
        d = gaussian(1, sigma, (0.4,))
        x = 1.3
        s2 = sigma**2
        expected = math.sqrt(s2 / (s2 + 2 * t)) * math.exp(-(x - 0.4) ** 2 / (2 * (s2 + 2 * t)))
        assert heat_solution(d, [x], t) == pytest.approx(expected, rel=1e-14)

    def test_monomial_matches_bundle(self):
        d, x, t = scenario_set(3)[2]
        mb = closed_form_moments(d, x, t)
        assert closed_form_monomial(d, x, t, (2, 0, 0)) == pytest.approx(mb.m2[0, 0], rel=1e-13)
        assert closed_form_monomial(d, x, t, (1, 1, 0)) == pytest.approx(mb.m2[0, 1], rel=1e-13)
        assert closed_form_monomial(d, x, t, (0, 2, 2)) == pytest.approx(mb.m4_pair[1, 2], rel=1e-13)
        assert closed_form_monomial(d, x, t, (0, 0, 0)) == pytest.approx(1.0, rel=1e-15)

    def test_time_validation(self):
        with pytest.raises(NonPositiveTime):
            closed_form_moments(constant(1), [0.0], 0.0)


scenario_indices = st.integers(0, 29)


@settings(max_examples=60, deadline=None)
@given(scenario_indices, st.floats(0.1, 50.0))
def test_ratios_invariant_under_scaling(i, factor):
    d, x, t = scenario_set(30)[i]
    a, b = closed_form_moments(d, x, t), closed_form_moments(d.scaled(factor), x, t)
    np.testing.assert_allclose(a.as_vector(), b.as_vector(), rtol=1e-10, atol=1e-12)
    assert b.u_value == pytest.approx(factor * a.u_value, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(scenario_indices, st.floats(-2.0, 2.0))
def test_translation_covariance(i, shift):
    d, x, t = scenario_set(30)[i]
    s = np.full(d.n, shift)
    a = closed_form_moments(d, x, t)
    b = closed_form_moments(d.translated(s), np.asarray(x) + s, t)
    np.testing.assert_allclose(a.as_vector(), b.as_vector(), rtol=1e-9, atol=1e-11)


@settings(max_examples=60, deadline=None)
@given(scenario_indices)
def test_moment_invariants(i):
    d, x, t = scenario_set(30)[i]
    mb = closed_form_moments(d, x, t)
    assert np.all(np.diag(mb.m2) >= mb.m1**2 * (1 - 1e-12))
    assert np.all(mb.m4_diag >= np.diag(mb.m2) ** 2 * (1 - 1e-12))
    assert np.all(np.linalg.eigvalsh(mb.m2) > -1e-12)
    np.testing.assert_allclose(mb.m2, mb.m2.T)


def test_round_trip(tmp_path):
    for d, _, _ in scenario_set(6):
        path = tmp_path / "s.json"
        path.write_text(dumps_scenario(d))
        assert load_scenario(path) == d
        assert json.loads(path.read_text())["n"] == d.n
