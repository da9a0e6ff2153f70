"""Input checks shared by the estimator wrappers."""

import numbers

from sklearn.utils.validation import check_X_y

from .exceptions import DimensionMismatch


def check_system(phi, y):
    """Validate a sensing matrix and measurement vector.

    Returns float64 copies; raises :class:`DimensionMismatch` on a shape
    mismatch and ``ValueError`` on non-finite entries.
    """
    try:
        phi, y = check_X_y(phi, y, dtype="float64", ensure_all_finite=True, y_numeric=True)
    except ValueError as exc:
        if "inconsistent numbers of samples" in str(exc):
            raise DimensionMismatch(str(exc)) from None
        raise
    return phi, y


def check_sparsity(k, phi):
    """``k`` must be an integer in ``[1, min(M, N)]``."""
    if not isinstance(k, numbers.Integral) or isinstance(k, bool):
        raise TypeError(f"sparsity must be an integer, got {type(k).__name__}")
    m, n = phi.shape
    if not 1 <= k <= min(m, n):
        raise DimensionMismatch(f"sparsity {k} outside [1, {min(m, n)}]")
    return int(k)
