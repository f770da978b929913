import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from helpers import constant, gaussian, scenario_set
from liyau import (
    DerivativeRatioTransformer,
    DimensionMismatch,
    FourthOrderLiYau,
    HeatFlowMoments,
    InadmissibleParams,
    InputError,
    NonPositiveTime,
    SecondOrderLiYau,
    check_second_order,
    SecondOrderParams,
    closed_form_moments,
)

DATA = gaussian(2, 0.8, (0.2, -0.1)).to_dict()
X = np.array([[0.0, 0.0, 1.0], [1.0, -0.5, 0.3], [2.0, 2.0, 1.7]])


def test_get_params_and_clone():
    est = SecondOrderLiYau(DATA, alpha=0.1, gamma=0.5)
    params = est.get_params()
    assert params["alpha"] == 0.1 and params["engine"] == "closed_form"
    copy = clone(est).set_params(beta=0.2)
    assert copy.beta == 0.2 and est.beta == 0.0


def test_moments_transform():
    est = HeatFlowMoments(DATA).fit()
    out = est.transform(X)
    names = est.get_feature_names_out()
    assert out.shape == (3, len(names))
    mb = closed_form_moments(gaussian(2, 0.8, (0.2, -0.1)), X[1, :2], X[1, 2])
    np.testing.assert_allclose(out[1, 1:-1], mb.as_vector())
    assert out[1, 0] == pytest.approx(mb.log_u)


def test_engines_agree():
    a = HeatFlowMoments(DATA).fit().transform(X)
    b = HeatFlowMoments(DATA, engine="gauss_hermite").fit().transform(X)
    np.testing.assert_allclose(a[:, :-1], b[:, :-1], atol=1e-8)
    with pytest.raises(InputError):
        HeatFlowMoments(DATA, engine="simpson").fit()


def test_ratio_transformer():
    est = DerivativeRatioTransformer(constant(2)).fit()
    out = est.transform(X)
    assert out.shape == (3, len(est.get_feature_names_out()))
    assert np.all(np.abs(out) < 1e-14)


def test_second_order_predict_and_score():
    est = SecondOrderLiYau(DATA).fit()
    slack = est.decision_function(X)
    d = gaussian(2, 0.8, (0.2, -0.1))
    expected = [check_second_order(d, row[:2], row[2], SecondOrderParams()).slack for row in X]
    np.testing.assert_allclose(slack, expected)
    assert est.predict(X).all()
    assert est.score(X) == pytest.approx(min(expected))


def test_fourth_order_inadmissible():
    est = FourthOrderLiYau(DATA, k1=1.0, k4=-1.0).fit()
    with pytest.raises(InadmissibleParams):
        est.predict(X)
    ok = FourthOrderLiYau(DATA, k1=1.0, k4=-1.0, allow_inadmissible=True).fit()
    assert ok.decision_function(X).shape == (3,)


def test_pipeline():
    pipe = make_pipeline(FunctionTransformer(lambda z: z), SecondOrderLiYau(DATA))
    pipe.fit(X)
    assert pipe.predict(X).all()


def test_input_validation():
    est = SecondOrderLiYau(DATA).fit()
    with pytest.raises(DimensionMismatch):
        est.predict(X[:, :2])
    with pytest.raises(NonPositiveTime):
        est.predict(np.array([[0.0, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        est.predict(np.array([[0.0, np.nan, 1.0]]))
    with pytest.raises(InputError):
        SecondOrderLiYau().fit()


def test_holds_on_scenarios():
    for d, x, t in scenario_set(9):
        est = FourthOrderLiYau(d, k1=d.n * (d.n - 1) * 0.5, k2=-0.1, k4=-0.5).fit()
        assert est.predict(np.array([[*x, t]])).all()
