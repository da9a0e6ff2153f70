import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treepursuit.exceptions import DimensionMismatch, EmptyBatch, ZeroSignal
from treepursuit.signals import (
    SparseSignal,
    add_noise_for_snr,
    compute_metrics,
    dump_instance_csv,
    gen_sensing_matrix,
    gen_sparse_signal,
    load_instance_csv,
    make_instance,
    realized_snr_db,
)


def test_matrix_is_seeded_and_scaled():
    a = gen_sensing_matrix(100, 256, 3)
    assert np.array_equal(a, gen_sensing_matrix(100, 256, 3))
    assert not np.array_equal(a, gen_sensing_matrix(100, 256, 4))
    # column energies concentrate around 1 for N(0, 1/M) entries
    assert abs(np.mean(np.sum(a**2, axis=0)) - 1.0) < 0.03
    with pytest.raises(DimensionMismatch):
        gen_sensing_matrix(0, 5, 0)


def test_sparse_signal_support_and_values():
    x = gen_sparse_signal(256, 20, 9)
    assert x.k == 20 and len(set(x.support)) == 20
    assert list(x.support) == sorted(x.support)
    assert np.all(np.abs(x.values) >= 1e-6)
    assert np.count_nonzero(x.dense()) == 20
    s = gen_sparse_signal(50, 5, 1, coef="sign")
    assert set(np.abs(s.values)) == {1.0}
    with pytest.raises(DimensionMismatch):
        gen_sparse_signal(5, 6, 0)
    with pytest.raises(ValueError):
        gen_sparse_signal(5, 2, 0, coef="uniform")


def test_from_dense_roundtrip():
    x = gen_sparse_signal(30, 4, 2)
    y = SparseSignal.from_dense(x.dense())
    assert y.support == x.support and np.array_equal(y.values, x.values)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 60), st.integers(0, 10**6))
def test_realized_snr_matches_target(snr, seed):
    inst = make_instance(20, 40, 3, seed, snr_db=snr)
    assert realized_snr_db(inst) == pytest.approx(snr, abs=1e-9)


def test_noiseless_instance():
    inst = make_instance(10, 20, 3, 0)
    assert inst.snr_db is None and not inst.v.any()
    assert np.allclose(inst.y, inst.phi @ inst.x.dense())


def test_zero_signal_rejected():
    with pytest.raises(ZeroSignal):
        add_noise_for_snr(np.zeros((4, 6)), gen_sparse_signal(6, 2, 0), 20.0, 0)


def test_metrics():
    x = gen_sparse_signal(10, 2, 0)
    wrong = x.dense().copy()
    wrong[x.support[0]] = 0.0
    m = compute_metrics([(x, x.dense(), x.support), (x, wrong, x.support[1:])])
    assert m.err == 0.5
    assert m.mse == pytest.approx(x.values[0] ** 2 / 10 / 2)
    m = compute_metrics([(x.dense(), x.dense(), x.support)])
    assert m.err == 1.0 and m.mse == 0.0
    with pytest.raises(EmptyBatch):
        compute_metrics([])


def test_instance_csv_roundtrip(tmp_path):
    inst = make_instance(6, 9, 2, 5, snr_db=13.0)
    p = tmp_path / "inst.csv"
    dump_instance_csv(inst, p)
    back = load_instance_csv(p)
    assert np.array_equal(back.phi, inst.phi)
    assert np.array_equal(back.y, inst.y) and np.array_equal(back.v, inst.v)
    assert back.x.support == inst.x.support and back.snr_db == 13.0
    clean = make_instance(6, 9, 2, 5)
    dump_instance_csv(clean, p)
    assert load_instance_csv(p).snr_db is None


def test_streams_are_independent():
    # changing K must not change the matrix drawn for a seed
    assert np.array_equal(make_instance(8, 12, 2, 4).phi, make_instance(8, 12, 5, 4).phi)
    assert math.isfinite(realized_snr_db(make_instance(8, 12, 2, 4, snr_db=0.0)))
