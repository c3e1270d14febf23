import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hyperperc.errg import exact_moments
from hyperperc.estimators import CriticalPointEstimator, ERRGMoments, SusceptibilityCurve


def test_susceptibility_curve():
    est = SusceptibilityCurve(d=2, n=6, reps=500, seed=1)
    with pytest.raises(NotFittedError):
        est.predict([0.1])
    est.fit(np.array([0.1, 0.02, 0.05]))
    assert list(est.p_grid_) == [0.02, 0.05, 0.1]
    assert np.all(np.diff(est.chi_) > 0)
    assert est.predict([0.05])[0] == pytest.approx(est.chi_[1])
    assert est.chi_[0] < est.predict([0.03])[0] < est.chi_[1]
    with pytest.raises(ValueError):
        est.fit([1.5])


def test_params_roundtrip():
    est = SusceptibilityCurve(d=3, n=5)
    assert est.get_params()["d"] == 3
    c = clone(est.set_params(n=7))
    assert c.n == 7 and not hasattr(c, "chi_")


def test_errg_moments():
    est = ERRGMoments(n=3).fit()
    X = est.transform([0.5])
    assert X.shape == (1, 4)
    mo = exact_moments(3, 0.5)
    assert np.allclose(X[0], [mo.chi, mo.second_moment, mo.expected_edges, mo.expected_surplus])
    assert est.predict([0.5])[0] == pytest.approx(2.25)
    with pytest.raises(ValueError):
        ERRGMoments(n=3, precision="quad").fit()


def test_critical_point_estimator():
    est = CriticalPointEstimator(d=1, n=64, exact=True).fit()
    assert est.bracket_[0] <= est.p_c_ <= est.bracket_[1]
    assert not est.inconclusive_


def test_errg_fit_transform():
    assert ERRGMoments(n=3).fit_transform([0.5, 0.0]).shape == (2, 4)
