"""Least-squares, projection and correlation kernels shared by every solver.

Matrices are plain ``float64`` numpy arrays of shape ``(M, N)``; vectors are
1-D arrays.  A *support* is a tuple of strictly increasing 0-based column
indices (:func:`as_support` produces the canonical form).
"""

import math

import numpy as np

from .exceptions import DimensionMismatch, InsufficientCandidates, RankDeficient

#: Largest admissible 2-norm condition number of a column submatrix.
MAX_CONDITION = 1e12

# A column whose orthogonalised remainder falls below this fraction of its
# own norm is treated as lying in the current span.
_DEPENDENT_RTOL = 1e-10


def as_support(indices, n=None):
    """Return ``indices`` as a canonical support (sorted tuple of unique ints).

    Raises :class:`DimensionMismatch` if an index falls outside ``[0, n)`` or
    appears twice.
    """
    idx = tuple(sorted(int(i) for i in indices))
    if len(set(idx)) != len(idx):
        raise DimensionMismatch(f"duplicate indices in support {idx}")
    if idx and idx[0] < 0:
        raise DimensionMismatch(f"negative index in support {idx}")
    if n is not None and idx and idx[-1] >= n:
        raise DimensionMismatch(f"index {idx[-1]} out of range for {n} columns")
    return idx


def _check_system(phi, y, s):
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.ndim != 2:
        raise DimensionMismatch("sensing matrix must be 2-D")
    m, n = phi.shape
    if y.shape != (m,):
        raise DimensionMismatch(f"measurement has shape {y.shape}, expected ({m},)")
    cols = [int(j) for j in s]
    if len(set(cols)) != len(cols):
        raise DimensionMismatch("support contains duplicate indices")
    if any(j < 0 or j >= n for j in cols):
        raise DimensionMismatch(f"support index out of range [0, {n})")
    if len(cols) > m:
        raise DimensionMismatch(f"support of size {len(cols)} exceeds {m} rows")
    return phi, y, cols


def _factor(phi, cols):
    q, r = np.linalg.qr(phi[:, cols])
    if np.linalg.cond(r) > MAX_CONDITION:
        raise RankDeficient(f"columns {sorted(cols)} are numerically dependent")
    return q, r


def least_squares_on_support(phi, y, s):
    """Solve ``min_c ||y - phi[:, s] c||_2`` through a thin QR factorisation.

    Parameters
    ----------
    phi : ndarray of shape (M, N)
    y : ndarray of shape (M,)
    s : sequence of int
        Column indices; coefficients are returned in this order.

    Returns
    -------
    ndarray of shape (len(s),)
    """
    phi, y, cols = _check_system(phi, y, s)
    if not cols:
        return np.zeros(0)
    q, r = _factor(phi, cols)
    return np.linalg.solve(r, q.T @ y)


def residual(phi, y, s):
    """Component of ``y`` orthogonal to the span of ``phi[:, s]``."""
    phi, y, cols = _check_system(phi, y, s)
    if not cols:
        return y.copy()
    q, _ = _factor(phi, cols)
    return y - q @ (q.T @ y)


def abs_correlations(phi, r):
    """Vector of ``|phi_j' r|`` over every column."""
    return np.abs(np.asarray(phi).T @ np.asarray(r))


def correlations(phi, r, candidates):
    """List of ``(index, |phi_j' r|)`` pairs, one per candidate index."""
    phi = np.asarray(phi, dtype=float)
    r = np.asarray(r, dtype=float)
    if r.shape != (phi.shape[0],):
        raise DimensionMismatch(f"residual has shape {r.shape}, expected ({phi.shape[0]},)")
    cand = as_support(candidates, phi.shape[1])
    if not cand:
        return []
    vals = np.abs(phi[:, list(cand)].T @ r)
    return [(j, float(v)) for j, v in zip(cand, vals)]


def top_k_by_magnitude(pairs, k):
    """Indices of the ``k`` largest values; equal values prefer the smaller index.

    The result is a canonical (sorted) support.
    """
    pairs = list(pairs)
    if k > len(pairs):
        raise InsufficientCandidates(f"asked for {k} indices out of {len(pairs)}")
    if k <= 0:
        return ()
    ranked = sorted(pairs, key=lambda p: (-p[1], p[0]))
    return as_support(j for j, _ in ranked[:k])


def top_k_indices(values, k, exclude=()):
    """Vectorised :func:`top_k_by_magnitude` over a dense value array.

    Returns indices in rank order (largest first), skipping ``exclude``.
    """
    vals = np.array(values, dtype=float)
    if len(exclude):
        vals[list(exclude)] = -np.inf
    order = np.argsort(-vals, kind="stable")
    avail = len(vals) - len(set(exclude))
    if k > avail:
        raise InsufficientCandidates(f"asked for {k} indices out of {avail}")
    return [int(j) for j in order[:k]]


def extend_basis(q, col):
    """Append ``col`` to the orthonormal basis ``q`` (shape ``(M, i)``).

    Uses classical Gram-Schmidt with one re-orthogonalisation pass.  Returns
    ``(q_new, direction)`` where ``direction`` is the new unit vector, or
    ``None`` (and ``q`` unchanged) when ``col`` already lies in the span.
    """
    w = orthogonal_direction(q, col)
    if w is None:
        return q, None
    out = np.empty((q.shape[0], q.shape[1] + 1))
    out[:, :-1] = q
    out[:, -1] = w
    return out, w


def orthogonal_direction(q, col):
    """Unit vector along the part of ``col`` orthogonal to ``q``, or ``None``."""
    w = col - q @ (q.T @ col)
    w -= q @ (q.T @ w)
    nw = math.sqrt(w @ w)
    if nw <= _DEPENDENT_RTOL * math.sqrt(col @ col) or nw == 0.0:
        return None
    return w / nw
