"""Matching pursuit with tree pruning (TMP).

The search runs in two stages.  A greedy pre-selector first returns a small
index set ``theta``.  The tree search then grows causal paths one index per
layer, branching only over ``theta``.  Every path is completed to a full
size-K candidate by a *noncausal* set of columns most correlated with the
path's residual (drawn from all columns).  A path survives when its
candidate's residual norm does not exceed the pruning threshold.  That
threshold starts at ``epsilon_init`` and, after each layer, drops to the
smallest candidate residual seen so far.  The output is the least-squares
fit on the best candidate.

Indices are 0-based throughout.
"""

import bisect
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigError, DimensionMismatch, EmptyPreselection
from ..linalg import (
    abs_correlations,
    as_support,
    extend_basis,
    orthogonal_direction,
    residual,
    top_k_indices,
)
from .greedy import PreselectionResult, _prepare, fit_on_support, gomp, omp

logger = logging.getLogger(__name__)

PRESELECTORS = ("gomp", "omp", "all")


@dataclass(frozen=True)
class SearchPath:
    """A causal path: indices in the order they were added."""

    causal: tuple

    @property
    def key(self):
        return as_support(self.causal)

    def __len__(self):
        return len(self.causal)


@dataclass(frozen=True)
class PathEvaluation:
    path: SearchPath
    noncausal: tuple
    candidate: tuple
    candidate_residual_norm: float


@dataclass
class TmpConfig:
    """Parameters of a TMP run.

    Parameters
    ----------
    k : int
        Sparsity (tree depth).
    l : int
        gOMP width used by the default pre-selector.
    epsilon_init : float
        Pruning threshold of the first layer.  ``inf`` admits every
        first-layer path.
    n_max : int or None
        Cap on the number of survivors kept at the end of each layer.
    preselection_size : int or None
        Target ``|theta|``; defaults to ``2 * k``.
    preselection : {"gomp", "omp", "all"}
        ``"omp"`` runs OMP for ``preselection_size`` iterations; ``"all"``
        branches over every column.
    iterative_completion : bool
        Build the noncausal set greedily, one index at a time with
        re-projection, instead of the single-shot top-(K-i) correlations.
    exact_fit_tol : float or None
        Stop the search once the incumbent residual is at most
        ``exact_fit_tol * ||y||``; no candidate can do better than a zero
        residual.  ``None`` runs every layer.
    """

    k: int
    l: int = 2
    epsilon_init: float = math.inf
    n_max: int = None
    preselection_size: int = None
    preselection: str = "gomp"
    iterative_completion: bool = True
    exact_fit_tol: float = 1e-10

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.l < 1:
            raise ConfigError(f"l must be >= 1, got {self.l}")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")
        if self.preselection_size is None:
            self.preselection_size = 2 * self.k
        if self.preselection_size < self.k:
            raise ConfigError("preselection_size must be >= k")
        if self.preselection not in PRESELECTORS:
            raise ConfigError(f"unknown pre-selector {self.preselection!r}")
        if not self.epsilon_init > 0:
            raise ConfigError("epsilon_init must be positive")


@dataclass
class TreeStats:
    paths_expanded: int = 0
    pruned: int = 0
    duplicates_skipped: int = 0
    layers_completed: int = 0
    max_survivors: int = 0
    # smallest candidate residual over every evaluation, pruned or not
    best_evaluated: float = math.inf
    stopped_on_exact_fit: bool = False
    epsilons: list = field(default_factory=list)


@dataclass
class TreeState:
    layer: int
    survivors: list
    epsilon: float
    incumbent: tuple
    incumbent_residual: float
    stats: TreeStats


def preselect(phi, y, config):
    """Run the configured pre-selector and truncate to ``preselection_size``."""
    phi, y = _prepare(phi, y)
    n = phi.shape[1]
    size = min(config.preselection_size, n)
    if config.preselection == "all":
        res = PreselectionResult(theta=tuple(range(n)), order=tuple(range(n)), l=1, method="all")
    elif config.preselection == "omp":
        order = tuple(omp(phi, y, size))
        res = PreselectionResult(theta=as_support(order), order=order, l=1, method="omp_extended")
    else:
        res = gomp(phi, y, math.ceil(size / config.l), config.l)
        order = res.order[:size]
        res = PreselectionResult(theta=as_support(order), order=order, l=config.l, method="gomp")
    if len(res.theta) < config.k:
        raise EmptyPreselection(f"pre-selection kept {len(res.theta)} < k={config.k} indices")
    return res


def _greedy_completion(phi, y, causal, k):
    q, _ = np.linalg.qr(phi[:, list(causal)]) if causal else (np.empty((phi.shape[0], 0)), None)
    r = y - q @ (q.T @ y)
    chosen = []
    used = list(causal)
    for _ in range(k - len(causal)):
        c = abs_correlations(phi, r)
        c[used] = -np.inf
        j = int(np.argmax(c))
        chosen.append(j)
        used.append(j)
        q, w = extend_basis(q, phi[:, j])
        if w is not None:
            r = r - w * (w @ r)
    return chosen


def noncausal_completion(phi, y, causal, k, iterative=False):
    """Complete a causal path to a size-``k`` candidate and score it.

    The single-shot rule takes the ``k - i`` columns outside the path with
    the largest ``|phi_j' r|`` against the path residual, breaking ties
    toward smaller indices.  With ``iterative=True`` the columns are added
    one at a time, re-projecting after each pick.
    """
    phi, y = _prepare(phi, y)
    path = causal if isinstance(causal, SearchPath) else SearchPath(tuple(int(j) for j in causal))
    if len(path) > k:
        raise DimensionMismatch(f"path of length {len(path)} exceeds k={k}")
    if iterative:
        extra = _greedy_completion(phi, y, path.causal, k)
    else:
        r = residual(phi, y, path.causal)
        extra = top_k_indices(abs_correlations(phi, r), k - len(path), exclude=path.causal)
    noncausal = as_support(extra)
    candidate = as_support(path.causal + noncausal)
    norm = float(np.linalg.norm(residual(phi, y, candidate)))
    return PathEvaluation(path=path, noncausal=noncausal, candidate=candidate, candidate_residual_norm=norm)


def _add(key, j):
    pos = bisect.bisect_left(key, j)
    return key[:pos] + (j,) + key[pos:]


class _Node:
    __slots__ = ("key", "causal", "q", "r", "norm")

    def __init__(self, key, causal, q=None, r=None, norm=None):
        self.key = key
        self.causal = causal
        self.q = q
        self.r = r
        self.norm = norm


class _PathEvaluator:
    """Memoised completion and candidate scoring for one TMP run.

    Completions and candidate norms are functions of the index *set*, so both
    are cached by canonical key; paths reaching the same candidate therefore
    compare with bit-identical norms.
    """

    def __init__(self, phi, y, k, iterative):
        self.phi = phi
        self.y = y
        self.k = k
        self.iterative = iterative
        self.completion = {}
        self.cand_norm = {}

    def extend(self, parent, j):
        q, w = extend_basis(parent.q, self.phi[:, j])
        r = parent.r if w is None else parent.r - w * (w @ parent.r)
        return q, r

    def _score(self, cand):
        norm = self.cand_norm.get(cand)
        if norm is None:
            q, _ = np.linalg.qr(self.phi[:, list(cand)])
            r = self.y - q @ (q.T @ self.y)
            norm = math.sqrt(r @ r)
            self.cand_norm[cand] = norm
        return norm

    def evaluate(self, node):
        """Return ``(candidate, norm)`` for ``node``; computes ``node.q``/``r`` if needed."""
        cand = self.completion.get(node.key)
        if cand is not None:
            return cand, self._score(cand)
        if node.q is None:
            raise RuntimeError("node basis missing")
        if len(node.key) == self.k:
            cand = node.key
            self.completion[cand] = cand
            if cand not in self.cand_norm:
                self.cand_norm[cand] = math.sqrt(node.r @ node.r)
            return cand, self.cand_norm[cand]
        if not self.iterative:
            extra = top_k_indices(abs_correlations(self.phi, node.r), self.k - len(node.key), exclude=node.key)
            cand = as_support(node.key + tuple(extra))
            self.completion[node.key] = cand
            return cand, self._score(cand)
        visited = [node.key]
        key, r = node.key, node.r
        used = len(key)
        q = np.empty((self.phi.shape[0], self.k))
        q[:, :used] = node.q
        while True:
            cached = self.completion.get(key)
            if cached is not None:
                cand = cached
                break
            if len(key) == self.k:
                cand = key
                if cand not in self.cand_norm:
                    self.cand_norm[cand] = math.sqrt(r @ r)
                break
            c = abs_correlations(self.phi, r)
            c[list(key)] = -np.inf
            j = int(np.argmax(c))
            w = orthogonal_direction(q[:, :used], self.phi[:, j])
            if w is not None:
                q[:, used] = w
                used += 1
                r = r - w * (w @ r)
            key = _add(key, j)
            visited.append(key)
        for v in visited:
            self.completion[v] = cand
        return cand, self._score(cand)


def tmp(phi, y, config, theta=None, trace=None):
    """Recover a K-sparse signal with matching pursuit with tree pruning.

    Parameters
    ----------
    phi : ndarray of shape (M, N)
    y : ndarray of shape (M,)
    config : TmpConfig
    theta : sequence of int, optional
        Explicit branching set; bypasses the configured pre-selector.
    trace : list, optional
        If given, one ``(layer, key, candidate, norm, survived)`` tuple is
        appended per path evaluation.

    Returns
    -------
    RecoveryResult
        ``stats`` holds the :class:`TreeStats`; ``preselection`` the
        branching set.
    """
    phi, y = _prepare(phi, y)
    m, n = phi.shape
    k = config.k
    if k > m:
        raise DimensionMismatch(f"k={k} exceeds M={m}")
    if theta is None:
        pre = preselect(phi, y, config)
    else:
        t = as_support(theta, n)
        pre = PreselectionResult(theta=t, order=t, l=1, method="given")
        if len(t) < k:
            raise EmptyPreselection(f"theta has {len(t)} < k={k} indices")
    branch = pre.theta

    ev = _PathEvaluator(phi, y, k, config.iterative_completion)
    stats = TreeStats()
    stop_at = -math.inf if config.exact_fit_tol is None else config.exact_fit_tol * np.linalg.norm(y)
    root = _Node((), (), np.empty((m, 0)), y.copy())
    state = TreeState(layer=0, survivors=[root], epsilon=config.epsilon_init, incumbent=None,
                      incumbent_residual=math.inf, stats=stats)
    fallback, fallback_norm = None, math.inf

    done = False
    for i in range(1, k + 1):
        eps_i = state.epsilon
        eps_next = eps_i
        seen = set()
        layer = []
        for parent in state.survivors:
            for j in branch:
                if j in parent.key:
                    continue
                key = _add(parent.key, j)
                if key in seen:
                    stats.duplicates_skipped += 1
                    continue
                seen.add(key)
                node = _Node(key, parent.causal + (j,))
                if key not in ev.completion:
                    node.q, node.r = ev.extend(parent, j)
                cand, norm = ev.evaluate(node)
                stats.paths_expanded += 1
                if norm < stats.best_evaluated:
                    stats.best_evaluated = norm
                if norm < fallback_norm:
                    fallback, fallback_norm = cand, norm
                survived = norm <= eps_i
                if trace is not None:
                    trace.append((i, key, cand, norm, survived))
                if not survived:
                    stats.pruned += 1
                    continue
                if node.q is None:
                    node.q, node.r = ev.extend(parent, j)
                node.norm = norm
                layer.append(node)
                if norm <= eps_next:
                    eps_next = norm
                    state.incumbent, state.incumbent_residual = cand, norm
                if state.incumbent_residual <= stop_at:
                    stats.stopped_on_exact_fit = True
                    done = True
                    break
            if done:
                break
        if config.n_max is not None and len(layer) > config.n_max:
            layer.sort(key=lambda nd: (nd.norm, nd.key))
            del layer[config.n_max:]
        stats.max_survivors = max(stats.max_survivors, len(layer))
        stats.epsilons.append(eps_next)
        state.layer, state.survivors, state.epsilon = i, layer, eps_next
        stats.layers_completed = i
        if done:
            break
        if not layer:
            logger.debug("layer %d left no survivors; keeping incumbent", i)
            break

    if state.incumbent is None:
        # only reachable with a finite epsilon_init that pruned every first-layer path
        logger.warning("no path survived the initial threshold; returning best evaluated candidate")
        state.incumbent, state.incumbent_residual = fallback, fallback_norm
    result = fit_on_support(phi, y, state.incumbent, stats=stats, preselection=pre)
    result.state = state
    return result
