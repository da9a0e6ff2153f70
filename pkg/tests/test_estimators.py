import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from treepursuit import CoSaMPRecovery, GOMPRecovery, OMPRecovery, OracleRecovery, TMPRecovery
from treepursuit.exceptions import DimensionMismatch
from treepursuit.signals import make_instance

ESTIMATORS = [
    lambda k, t: OMPRecovery(k=k),
    lambda k, t: GOMPRecovery(k=k, l=2),
    lambda k, t: CoSaMPRecovery(k=k),
    lambda k, t: TMPRecovery(k=k, n_max=5),
    lambda k, t: OracleRecovery(support=t),
]


@pytest.mark.parametrize("make", ESTIMATORS)
def test_fit_predict(make):
    inst = make_instance(60, 128, 6, 2)
    est = make(6, inst.x.support).fit(inst.phi, inst.y)
    assert est.support_ == inst.x.support
    assert np.allclose(est.coef_, inst.x.dense(), atol=1e-10)
    assert np.allclose(est.predict(inst.phi), inst.y, atol=1e-10)
    assert est.residual_norm_ < 1e-10
    assert est.score(inst.phi, inst.y) == pytest.approx(1.0)


@pytest.mark.parametrize("make", ESTIMATORS)
def test_params_roundtrip(make):
    est = make(3, (0, 1, 2))
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    with pytest.raises(NotFittedError):
        twin.predict(np.ones((2, 5)))


def test_tmp_params_and_stats():
    est = TMPRecovery(k=4).set_params(n_max=2, preselection="omp")
    assert est.get_params()["n_max"] == 2
    inst = make_instance(30, 60, 4, 5, snr_db=20.0)
    est.fit(inst.phi, inst.y)
    assert est.stats_.max_survivors <= 2 and est.preselection_.method == "omp_extended"


def test_validation():
    inst = make_instance(20, 40, 3, 1)
    with pytest.raises(DimensionMismatch):
        OMPRecovery(k=3).fit(inst.phi, inst.y[:-1])
    bad = inst.phi.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        OMPRecovery(k=3).fit(bad, inst.y)
    with pytest.raises(DimensionMismatch):
        OMPRecovery(k=30).fit(inst.phi, inst.y)
    with pytest.raises(TypeError):
        OMPRecovery(k=2.5).fit(inst.phi, inst.y)
    est = OMPRecovery(k=3).fit(inst.phi, inst.y)
    with pytest.raises(DimensionMismatch):
        est.predict(inst.phi[:, :10])
