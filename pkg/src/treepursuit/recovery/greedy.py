"""Greedy baselines (OMP, gOMP, CoSaMP), the Oracle estimator and an
exhaustive l0 search used as a test oracle on tiny problems."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import DimensionMismatch, TooLarge
from ..linalg import (
    abs_correlations,
    as_support,
    extend_basis,
    least_squares_on_support,
    top_k_indices,
)

#: Cap on the number of supports :func:`exhaustive_l0` will enumerate.
MAX_ENUMERATION = 10**6

# gOMP stops once ||r|| falls below this fraction of ||y||.
GOMP_RESIDUAL_RTOL = 1e-10

COSAMP_STAGNATION_RTOL = 1e-7


@dataclass(frozen=True)
class PreselectionResult:
    """Column indices kept by a pre-selector.

    ``theta`` is canonical (sorted); ``order`` lists the same indices in the
    order they were selected.
    """

    theta: tuple
    order: tuple
    l: int
    method: str

    def first(self, k):
        """The pre-selector's own K-index estimate (first ``k`` picks)."""
        return as_support(self.order[:k])


@dataclass
class RecoveryResult:
    support: tuple
    x_hat: np.ndarray
    residual_norm: float
    stats: object = None
    preselection: PreselectionResult = None


def _prepare(phi, y):
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.ndim != 2 or y.shape != (phi.shape[0],):
        raise DimensionMismatch(f"incompatible shapes {phi.shape} and {y.shape}")
    return phi, y


def fit_on_support(phi, y, support, stats=None, preselection=None):
    """Least-squares refit on ``support`` packaged as a :class:`RecoveryResult`."""
    phi, y = _prepare(phi, y)
    support = as_support(support, phi.shape[1])
    x_hat = np.zeros(phi.shape[1])
    if support:
        x_hat[list(support)] = least_squares_on_support(phi, y, support)
    r = y - phi @ x_hat
    return RecoveryResult(
        support=support,
        x_hat=x_hat,
        residual_norm=float(np.linalg.norm(r)),
        stats=stats,
        preselection=preselection,
    )


def omp(phi, y, iterations):
    """Orthogonal matching pursuit.

    Adds ``argmax_j |phi_j' r|`` (smallest index on ties) per iteration and
    re-projects.  Returns the selected indices in selection order.
    """
    phi, y = _prepare(phi, y)
    m, n = phi.shape
    if iterations > min(m, n):
        raise DimensionMismatch(f"{iterations} iterations exceed min(M, N) = {min(m, n)}")
    q = np.empty((m, 0))
    r = y.copy()
    selected = []
    for _ in range(iterations):
        c = abs_correlations(phi, r)
        c[selected] = -np.inf
        j = int(np.argmax(c))
        selected.append(j)
        q, w = extend_basis(q, phi[:, j])
        if w is not None:
            r = r - w * (w @ r)
    return selected


def gomp(phi, y, k, l):
    """Generalized OMP: ``l`` indices per iteration for at most ``k`` iterations.

    Stops early once ``||r|| <= 1e-10 ||y||``.  Raises
    :class:`DimensionMismatch` if the selection would exceed ``M`` columns.
    """
    phi, y = _prepare(phi, y)
    m, n = phi.shape
    if l < 1:
        raise ValueError("gOMP width l must be >= 1")
    q = np.empty((m, 0))
    r = y.copy()
    selected = []
    stop = GOMP_RESIDUAL_RTOL * np.linalg.norm(y)
    for _ in range(k):
        if np.linalg.norm(r) <= stop:
            break
        if len(selected) + l > min(m, n):
            raise DimensionMismatch(
                f"gOMP would select {len(selected) + l} columns with only {m} rows"
            )
        picks = top_k_indices(abs_correlations(phi, r), l, exclude=selected)
        for j in picks:
            selected.append(j)
            q, w = extend_basis(q, phi[:, j])
            if w is not None:
                r = r - w * (w @ r)
    return PreselectionResult(theta=as_support(selected), order=tuple(selected), l=l, method="gomp")


def gomp_estimate(phi, y, k, l):
    """K-sparse estimate from gOMP.

    Runs ``min(k, min(M, N) // l)`` gOMP iterations, solves least squares on
    the selected set and keeps the ``k`` largest coefficients in magnitude.
    Returns the refit :class:`RecoveryResult`.
    """
    phi, y = _prepare(phi, y)
    iters = max(1, min(k, min(phi.shape) // l))
    pre = gomp(phi, y, iters, l)
    theta = pre.theta
    if len(theta) > k:
        b = least_squares_on_support(phi, y, theta)
        theta = as_support(theta[i] for i in top_k_indices(np.abs(b), k))
    return fit_on_support(phi, y, theta, preselection=pre)


def cosamp(phi, y, k, max_iterations=40):
    """CoSaMP (Needell and Tropp).

    Each iteration merges the ``2k`` strongest proxy indices with the
    current support, solves least squares on the merge, keeps the ``k``
    largest coefficients and updates the residual.  Iteration stops after
    ``max_iterations`` or when the residual norm changes by less than a
    relative ``1e-7``.  For ``y = 0`` every proxy value ties, so the first
    iterate keeps indices ``0..k-1`` and the loop stops there.
    """
    phi, y = _prepare(phi, y)
    m, n = phi.shape
    if 3 * k > m:
        raise DimensionMismatch(f"CoSaMP needs 3k <= M, got k={k}, M={m}")
    support = ()
    r = y.copy()
    prev = np.linalg.norm(r)
    ynorm = prev
    for _ in range(max_iterations):
        proxy = abs_correlations(phi, r)
        omega = top_k_indices(proxy, min(2 * k, n))
        merged = as_support(set(omega) | set(support))
        b = least_squares_on_support(phi, y, merged)
        keep = top_k_indices(np.abs(b), k)
        support = as_support(merged[i] for i in keep)
        coef = b[[merged.index(j) for j in support]]
        r = y - phi[:, list(support)] @ coef
        cur = np.linalg.norm(r)
        if cur <= GOMP_RESIDUAL_RTOL * ynorm or abs(prev - cur) <= COSAMP_STAGNATION_RTOL * max(prev, np.finfo(float).tiny):
            break
        prev = cur
    return support


def oracle_estimator(phi, y, t):
    """Least squares on the true support ``t``; zeros elsewhere."""
    return fit_on_support(phi, y, t)


def _projection_norm(phi, y, cols):
    a = phi[:, cols]
    c, *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(np.linalg.norm(y - a @ c))


def exhaustive_l0(phi, y, k, return_norms=False):
    """Size-``k`` support with the smallest residual, by full enumeration.

    Ties keep the lexicographically first support.  With
    ``return_norms=True`` the result is ``(support, best_norm, runner_up_norm)``.
    """
    phi, y = _prepare(phi, y)
    n = phi.shape[1]
    total = math.comb(n, k)
    if total > MAX_ENUMERATION:
        raise TooLarge(f"C({n}, {k}) = {total} supports exceeds {MAX_ENUMERATION}")
    best, best_norm, runner_up = None, math.inf, math.inf
    for s in itertools.combinations(range(n), k):
        v = _projection_norm(phi, y, list(s)) if s else float(np.linalg.norm(y))
        if v < best_norm:
            best, best_norm, runner_up = s, v, best_norm
        elif v < runner_up:
            runner_up = v
    if return_norms:
        return tuple(best), best_norm, runner_up
    return tuple(best)
