"""Seeded problem instances and the recovery metrics (ERR, MSE).

Random streams
--------------
Every generator takes an integer ``seed`` and draws from
``numpy.random.default_rng([seed, stream])`` where ``stream`` is 0 for the
sensing matrix, 1 for the sparse signal and 2 for the noise direction.  An
instance is therefore a pure function of ``(m, n, k, snr_db, seed)`` and
the three parts are statistically independent of each other.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, EmptyBatch, ZeroSignal
from .linalg import as_support

MATRIX_STREAM, SIGNAL_STREAM, NOISE_STREAM = 0, 1, 2

# Nonzero coefficients smaller than this are redrawn.
MIN_ABS_COEF = 1e-6

COEF_DISTRIBUTIONS = ("gaussian", "sign")


def _rng(seed, stream):
    return np.random.default_rng([int(seed), stream])


@dataclass(frozen=True)
class SparseSignal:
    """K-sparse ground truth of length ``n``; ``values[i]`` sits at ``support[i]``."""

    n: int
    k: int
    support: tuple
    values: np.ndarray

    def __post_init__(self):
        if len(self.support) != self.k or len(self.values) != self.k:
            raise DimensionMismatch("support/values length must equal k")
        if self.k > self.n:
            raise DimensionMismatch("k exceeds n")
        if np.any(np.asarray(self.values) == 0):
            raise ValueError("sparse signal values must be nonzero")

    def dense(self):
        x = np.zeros(self.n)
        x[list(self.support)] = self.values
        return x

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=float)
        support = tuple(int(i) for i in np.flatnonzero(x))
        return cls(n=len(x), k=len(support), support=support, values=x[list(support)])


@dataclass(frozen=True)
class MeasurementInstance:
    phi: np.ndarray
    x: SparseSignal
    v: np.ndarray
    y: np.ndarray
    seed: int
    snr_db: float = None  # None marks a noiseless instance

    @property
    def m(self):
        return self.phi.shape[0]

    @property
    def n(self):
        return self.phi.shape[1]

    @property
    def k(self):
        return self.x.k


@dataclass(frozen=True)
class Metrics:
    err: float
    mse: float
    snr_db: float = None
    trials: int = field(default=0)


def gen_sensing_matrix(m, n, seed):
    """``m x n`` matrix with i.i.d. ``N(0, 1/m)`` entries."""
    if m < 1 or n < 1:
        raise DimensionMismatch(f"matrix dimensions must be positive, got {m}x{n}")
    return _rng(seed, MATRIX_STREAM).normal(0.0, 1.0 / math.sqrt(m), size=(m, n))


def gen_sparse_signal(n, k, seed, coef="gaussian"):
    """Uniformly placed K-sparse signal.

    ``coef="gaussian"`` draws standard normal values (redrawn while
    ``|value| < 1e-6``); ``coef="sign"`` draws random +/-1.
    """
    if not 1 <= k <= n:
        raise DimensionMismatch(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = _rng(seed, SIGNAL_STREAM)
    support = as_support(rng.choice(n, size=k, replace=False))
    if coef == "gaussian":
        values = rng.standard_normal(k)
        small = np.abs(values) < MIN_ABS_COEF
        while small.any():
            values[small] = rng.standard_normal(int(small.sum()))
            small = np.abs(values) < MIN_ABS_COEF
    elif coef == "sign":
        values = rng.choice([-1.0, 1.0], size=k)
    else:
        raise ValueError(f"unknown coefficient distribution {coef!r}")
    return SparseSignal(n=n, k=k, support=support, values=values)


def add_noise_for_snr(phi, x, snr_db, seed):
    """Measure ``x`` through ``phi`` and add noise hitting ``snr_db`` exactly.

    The noise direction is Gaussian; its length is set so that
    ``10 log10(||phi x||^2 / ||v||^2)`` equals ``snr_db``.  Pass
    ``snr_db=None`` for a noiseless instance.
    """
    phi = np.asarray(phi, dtype=float)
    if isinstance(x, np.ndarray):
        x = SparseSignal.from_dense(x)
    clean = phi[:, list(x.support)] @ x.values
    m = phi.shape[0]
    if snr_db is None:
        v = np.zeros(m)
    else:
        if not math.isfinite(snr_db):
            raise ValueError("snr_db must be finite (use None for noiseless)")
        power = float(clean @ clean)
        if power == 0.0:
            raise ZeroSignal("cannot set an SNR for a zero measurement")
        v = _rng(seed, NOISE_STREAM).standard_normal(m)
        v *= math.sqrt(power / 10.0 ** (snr_db / 10.0)) / np.linalg.norm(v)
    return MeasurementInstance(phi=phi, x=x, v=v, y=clean + v, seed=int(seed), snr_db=snr_db)


def make_instance(m, n, k, seed, snr_db=None, coef="gaussian"):
    phi = gen_sensing_matrix(m, n, seed)
    x = gen_sparse_signal(n, k, seed, coef=coef)
    return add_noise_for_snr(phi, x, snr_db, seed)


def realized_snr_db(instance):
    clean = instance.y - instance.v
    return 10.0 * math.log10(float(clean @ clean) / float(instance.v @ instance.v))


def compute_metrics(trials, snr_db=None):
    """Aggregate ``(x_true, x_hat, support_hat)`` triples into ERR and MSE.

    ``x_true`` may be a :class:`SparseSignal` or a dense vector.  ERR counts
    trials whose estimated support equals the true support exactly; MSE is
    the mean over trials of ``||x - x_hat||^2 / N``.
    """
    trials = list(trials)
    if not trials:
        raise EmptyBatch("no trials to aggregate")
    hits = 0
    sq = 0.0
    n0 = None
    for x_true, x_hat, support_hat in trials:
        if isinstance(x_true, SparseSignal):
            truth, dense = x_true.support, x_true.dense()
        else:
            dense = np.asarray(x_true, dtype=float)
            truth = tuple(int(i) for i in np.flatnonzero(dense))
        x_hat = np.asarray(x_hat, dtype=float)
        if n0 is None:
            n0 = len(dense)
        if len(dense) != n0 or len(x_hat) != n0:
            raise DimensionMismatch("inconsistent signal length across trials")
        hits += as_support(support_hat) == truth
        diff = dense - x_hat
        sq += float(diff @ diff) / n0
    return Metrics(err=hits / len(trials), mse=sq / len(trials), snr_db=snr_db, trials=len(trials))


def dump_instance_csv(instance, path):
    """Write an instance as plain-decimal CSV.

    Layout: header ``m,n,k,seed,snr_db``, one value row, then the ``m``
    matrix rows, then one row each for the dense ``x``, ``v`` and ``y``.
    A noiseless instance stores an empty ``snr_db`` field.
    """
    fmt = "{:.17g}".format
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "n", "k", "seed", "snr_db"])
        snr = "" if instance.snr_db is None else fmt(instance.snr_db)
        w.writerow([instance.m, instance.n, instance.k, instance.seed, snr])
        for row in instance.phi:
            w.writerow([fmt(a) for a in row])
        for vec in (instance.x.dense(), instance.v, instance.y):
            w.writerow([fmt(a) for a in vec])


def load_instance_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["m", "n", "k", "seed", "snr_db"]:
        raise ValueError(f"{path}: not an instance dump")
    m, n, k, seed = (int(a) for a in rows[1][:4])
    snr = float(rows[1][4]) if rows[1][4] else None
    phi = np.array(rows[2 : 2 + m], dtype=float)
    x, v, y = (np.array(r, dtype=float) for r in rows[2 + m : 5 + m])
    if phi.shape != (m, n) or len(x) != n or len(v) != m or len(y) != m:
        raise DimensionMismatch(f"{path}: sizes disagree with header")
    sig = SparseSignal.from_dense(x)
    if sig.k != k:
        raise DimensionMismatch(f"{path}: header k={k} but x has {sig.k} nonzeros")
    return MeasurementInstance(phi=phi, x=sig, v=v, y=y, seed=seed, snr_db=snr)
