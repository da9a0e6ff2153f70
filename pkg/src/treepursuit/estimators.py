"""scikit-learn style wrappers around the recovery functions.

``fit(X, y)`` takes the sensing matrix as ``X`` (one row per measurement)
and the measurement vector as ``y``.  The recovered sparse vector is stored
in ``coef_``, so ``predict(X)`` returns ``X @ coef_``.

>>> import numpy as np
>>> from treepursuit.estimators import TMPRecovery
>>> phi = np.eye(4)[:, [0, 1, 2, 3]]
>>> est = TMPRecovery(k=1).fit(phi, np.array([0.0, 3.0, 0.0, 0.0]))
>>> est.support_
(1,)
"""

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_sparsity, check_system
from .exceptions import DimensionMismatch
from .linalg import as_support
from .recovery import TmpConfig, cosamp, fit_on_support, gomp_estimate, omp, oracle_estimator, tmp


class _RecoveryBase(RegressorMixin, BaseEstimator):
    def _store(self, result, n):
        self.coef_ = result.x_hat
        self.support_ = result.support
        self.residual_norm_ = result.residual_norm
        self.n_features_in_ = n
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype="float64")
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"X has {X.shape[1]} columns, fitted with {self.n_features_in_}")
        return X @ self.coef_


class OMPRecovery(_RecoveryBase):
    """Orthogonal matching pursuit with ``k`` iterations."""

    def __init__(self, k=1):
        self.k = k

    def fit(self, X, y):
        phi, y = check_system(X, y)
        k = check_sparsity(self.k, phi)
        return self._store(fit_on_support(phi, y, omp(phi, y, k)), phi.shape[1])


class GOMPRecovery(_RecoveryBase):
    """Generalized OMP selecting ``l`` columns per iteration.

    The K-sparse estimate keeps the ``k`` largest least-squares
    coefficients over the selected columns.
    """

    def __init__(self, k=1, l=2):
        self.k = k
        self.l = l

    def fit(self, X, y):
        phi, y = check_system(X, y)
        k = check_sparsity(self.k, phi)
        return self._store(gomp_estimate(phi, y, k, self.l), phi.shape[1])


class CoSaMPRecovery(_RecoveryBase):
    def __init__(self, k=1, max_iter=40):
        self.k = k
        self.max_iter = max_iter

    def fit(self, X, y):
        phi, y = check_system(X, y)
        k = check_sparsity(self.k, phi)
        support = cosamp(phi, y, k, max_iterations=self.max_iter)
        return self._store(fit_on_support(phi, y, support), phi.shape[1])


class TMPRecovery(_RecoveryBase):
    """Matching pursuit with tree pruning.

    Parameters mirror :class:`treepursuit.recovery.TmpConfig`.  After
    fitting, ``stats_`` holds the search statistics and ``preselection_``
    the branching set.
    """

    def __init__(self, k=1, l=2, n_max=None, preselection="gomp", preselection_size=None,
                 epsilon_init=math.inf, iterative_completion=True, exact_fit_tol=1e-10):
        self.k = k
        self.l = l
        self.n_max = n_max
        self.preselection = preselection
        self.preselection_size = preselection_size
        self.epsilon_init = epsilon_init
        self.iterative_completion = iterative_completion
        self.exact_fit_tol = exact_fit_tol

    def fit(self, X, y):
        phi, y = check_system(X, y)
        k = check_sparsity(self.k, phi)
        cfg = TmpConfig(k=k, l=self.l, epsilon_init=self.epsilon_init, n_max=self.n_max,
                        preselection_size=self.preselection_size, preselection=self.preselection,
                        iterative_completion=self.iterative_completion, exact_fit_tol=self.exact_fit_tol)
        result = tmp(phi, y, cfg)
        self.stats_ = result.stats
        self.preselection_ = result.preselection
        return self._store(result, phi.shape[1])


class OracleRecovery(_RecoveryBase):
    """Least squares on a known support (the reference estimator)."""

    def __init__(self, support=()):
        self.support = support

    def fit(self, X, y):
        phi, y = check_system(X, y)
        s = as_support(np.atleast_1d(self.support), phi.shape[1])
        return self._store(oracle_estimator(phi, y, s), phi.shape[1])
