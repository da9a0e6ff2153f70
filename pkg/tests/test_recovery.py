import itertools

import numpy as np
import pytest

from treepursuit.exceptions import DimensionMismatch, TooLarge
from treepursuit.linalg import residual
from treepursuit.recovery import (
    cosamp,
    exhaustive_l0,
    fit_on_support,
    gomp,
    gomp_estimate,
    omp,
    oracle_estimator,
)
from treepursuit.signals import make_instance


def test_omp_recovers_easy_instances():
    for seed in range(10):
        inst = make_instance(100, 256, 5, seed)
        sel = omp(inst.phi, inst.y, 5)
        assert tuple(sorted(sel)) == inst.x.support


def test_omp_selection_order_is_greedy():
    inst = make_instance(30, 60, 4, 2)
    sel = omp(inst.phi, inst.y, 3)
    c = np.abs(inst.phi.T @ inst.y)
    assert sel[0] == int(np.argmax(c))
    r = residual(inst.phi, inst.y, sel[:1])
    c = np.abs(inst.phi.T @ r)
    c[sel[0]] = -1
    assert sel[1] == int(np.argmax(c))


def test_omp_iteration_limit():
    inst = make_instance(5, 10, 2, 0)
    with pytest.raises(DimensionMismatch):
        omp(inst.phi, inst.y, 6)


def test_gomp_width_and_truncation():
    inst = make_instance(60, 120, 8, 1)
    pre = gomp(inst.phi, inst.y, 4, 3)
    assert len(pre.order) == 12 and pre.l == 3
    top = np.argsort(-np.abs(inst.phi.T @ inst.y), kind="stable")[:3]
    assert list(pre.order[:3]) == [int(j) for j in top]
    assert pre.first(5) == tuple(sorted(pre.order[:5]))


def test_gomp_stops_on_exact_fit_and_guards_rows():
    phi = np.eye(6)
    y = np.zeros(6)
    y[[1, 4]] = [2.0, -1.0]
    pre = gomp(phi, y, 3, 2)
    assert pre.theta == (1, 4)
    with pytest.raises(DimensionMismatch):
        gomp(np.eye(5), np.ones(5), 3, 2)


def test_gomp_estimate_is_k_sparse():
    inst = make_instance(100, 256, 10, 3)
    res = gomp_estimate(inst.phi, inst.y, 10, 2)
    assert len(res.support) == 10
    assert res.support == inst.x.support


def test_cosamp():
    hits = sum(
        cosamp(inst.phi, inst.y, 8) == inst.x.support
        for inst in (make_instance(100, 256, 8, s) for s in range(10))
    )
    assert hits >= 9
    with pytest.raises(DimensionMismatch):
        cosamp(np.ones((10, 20)), np.ones(10), 4)
    assert cosamp(np.eye(9), np.zeros(9), 2) == (0, 1)


def test_oracle_is_exact_when_noiseless():
    inst = make_instance(20, 40, 5, 4)
    res = oracle_estimator(inst.phi, inst.y, inst.x.support)
    assert np.allclose(res.x_hat, inst.x.dense(), atol=1e-12)
    assert res.residual_norm < 1e-12


def test_fit_on_support_is_order_free():
    inst = make_instance(20, 40, 5, 4, snr_db=10.0)
    a = fit_on_support(inst.phi, inst.y, [7, 3, 30])
    b = fit_on_support(inst.phi, inst.y, [3, 7, 30])
    assert np.array_equal(a.x_hat, b.x_hat) and a.support == (3, 7, 30)


def test_exhaustive_l0_finds_truth_and_reports_gap():
    inst = make_instance(8, 12, 2, 0)
    s, best, runner = exhaustive_l0(inst.phi, inst.y, 2, return_norms=True)
    assert s == inst.x.support and best < 1e-12 < runner
    # brute force reference
    norms = {c: np.linalg.norm(residual(inst.phi, inst.y, c)) for c in itertools.combinations(range(12), 2)}
    assert min(norms, key=norms.get) == s


def test_exhaustive_l0_tie_prefers_lexicographic():
    phi = np.eye(4)
    assert exhaustive_l0(phi, np.zeros(4), 2) == (0, 1)


def test_exhaustive_l0_guard():
    with pytest.raises(TooLarge):
        exhaustive_l0(np.ones((4, 60)), np.ones(4), 8)
