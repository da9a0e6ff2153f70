import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mp_lstsq
from treepursuit.exceptions import DimensionMismatch, InsufficientCandidates, RankDeficient
from treepursuit.linalg import (
    as_support,
    correlations,
    extend_basis,
    least_squares_on_support,
    residual,
    top_k_by_magnitude,
    top_k_indices,
)


def test_identity_least_squares():
    c = least_squares_on_support(np.eye(3), np.array([5.0, 0, 0]), [0])
    assert c == pytest.approx([5.0])


def test_orthogonal_measurement_gives_zero_coefficients():
    q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((5, 5)))
    c = least_squares_on_support(q, q[:, 4] * 2.0, [0, 1, 2])
    assert np.allclose(c, 0.0, atol=1e-14)


def test_least_squares_matches_extended_precision():
    rng = np.random.default_rng(7)
    phi = rng.standard_normal((4, 6))
    y = rng.standard_normal(4)
    c_ref, _ = mp_lstsq(phi, y, [0, 2])
    assert np.allclose(least_squares_on_support(phi, y, [0, 2]), c_ref, atol=1e-8)


def test_coefficients_follow_support_order():
    rng = np.random.default_rng(3)
    phi = rng.standard_normal((6, 5))
    y = rng.standard_normal(6)
    a = least_squares_on_support(phi, y, [3, 1])
    b = least_squares_on_support(phi, y, [1, 3])
    assert np.allclose(a, b[::-1])


def test_residual_empty_and_exact_span():
    rng = np.random.default_rng(4)
    phi = rng.standard_normal((5, 8))
    y = rng.standard_normal(5)
    assert np.array_equal(residual(phi, y, []), y)
    y2 = phi[:, [1, 6]] @ np.array([2.0, -1.0])
    assert np.linalg.norm(residual(phi, y2, [1, 6])) < 1e-10


def test_residual_norm_matches_extended_precision():
    rng = np.random.default_rng(11)
    phi = rng.standard_normal((5, 8))
    y = rng.standard_normal(5)
    _, r_ref = mp_lstsq(phi, y, [0, 3, 5])
    assert abs(np.linalg.norm(residual(phi, y, [0, 3, 5])) - np.linalg.norm(r_ref)) < 1e-8


def test_errors():
    phi = np.random.default_rng(0).standard_normal((3, 5))
    y = np.ones(3)
    with pytest.raises(DimensionMismatch):
        least_squares_on_support(phi, y, [0, 1, 2, 3])
    with pytest.raises(DimensionMismatch):
        least_squares_on_support(phi, y, [7])
    with pytest.raises(DimensionMismatch):
        residual(phi, np.ones(4), [0])
    dup = np.column_stack([phi[:, 0], phi[:, 0], phi[:, 1]])
    with pytest.raises(RankDeficient):
        least_squares_on_support(dup, y, [0, 1])
    with pytest.raises(DimensionMismatch):
        as_support([1, 1])


def test_correlations():
    rng = np.random.default_rng(5)
    phi = rng.standard_normal((6, 9))
    assert all(v == 0 for _, v in correlations(phi, np.zeros(6), range(9)))
    r = rng.standard_normal(6)
    phi[:, 4] = r / np.linalg.norm(r)
    pairs = dict(correlations(phi, r, [1, 4, 7]))
    assert pairs[4] == pytest.approx(np.linalg.norm(r), rel=1e-14)
    for j, v in pairs.items():
        naive = abs(sum(phi[i, j] * r[i] for i in range(6)))
        assert abs(v - naive) <= 1e-12
    with pytest.raises(DimensionMismatch):
        correlations(phi, np.ones(5), [0])


def test_top_k_worked_example():
    pairs = [(5, 0.3), (7, 0.9), (9, 0.1), (11, 0.6)]
    assert top_k_by_magnitude(pairs, 2) == (7, 11)


def test_top_k_ties_prefer_small_index():
    assert top_k_by_magnitude([(3, 1.0), (1, 1.0), (2, 1.0)], 2) == (1, 2)
    assert top_k_indices([1.0, 1.0, 1.0, 2.0], 2) == [3, 0]


def test_top_k_full_and_errors():
    pairs = [(j, float(v)) for j, v in enumerate(np.random.default_rng(1).random(6))]
    assert top_k_by_magnitude(pairs, 6) == tuple(range(6))
    with pytest.raises(InsufficientCandidates):
        top_k_by_magnitude(pairs, 7)
    with pytest.raises(InsufficientCandidates):
        top_k_indices(np.ones(4), 3, exclude=[0, 1])


def test_extend_basis_dependent_column():
    q = np.eye(4)[:, :2]
    q2, w = extend_basis(q, np.array([1.0, 2.0, 0.0, 0.0]))
    assert w is None and q2 is q
    q3, w = extend_basis(q, np.array([1.0, 0.0, 3.0, 0.0]))
    assert np.allclose(w, [0, 0, 1, 0]) and q3.shape == (4, 3)


@st.composite
def nested_supports(draw):
    m = draw(st.integers(3, 12))
    n = draw(st.integers(m, 20))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    big = draw(st.integers(1, m))
    sp = tuple(sorted(rng.choice(n, size=big, replace=False)))
    small = draw(st.integers(0, big))
    s = tuple(sorted(rng.choice(sp, size=small, replace=False))) if small else ()
    return rng.standard_normal((m, n)), rng.standard_normal(m), s, sp


@settings(max_examples=200, deadline=None)
@given(nested_supports())
def test_kernel_invariants(case):
    phi, y, s, sp = case
    ny = np.linalg.norm(y)
    r = residual(phi, y, sp)
    assert np.max(np.abs(phi[:, list(sp)].T @ r)) <= 1e-8 * ny
    assert np.allclose(residual(phi, r, sp), r, atol=1e-10)
    assert np.linalg.norm(r) <= np.linalg.norm(residual(phi, y, s)) + 1e-10
