"""Monte-Carlo experiment harness: ERR and MSE sweeps, timing, diagnostics.

Trial ``t`` of every sweep point uses the instance seed ``config.seed + t``
so all algorithms see the same instance stream.  Records are aggregated in
trial order, which makes the CSV output independent of ``jobs``.
"""

import configparser
import csv
import logging
import math
import re
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import analysis
from .exceptions import ConfigError, TreePursuitError
from .recovery import (
    RecoveryResult,
    TmpConfig,
    cosamp,
    fit_on_support,
    gomp_estimate,
    omp,
    oracle_estimator,
    preselect,
    tmp,
)
from .signals import add_noise_for_snr, gen_sensing_matrix, gen_sparse_signal, make_instance

logger = logging.getLogger(__name__)

CSV_HEADER = ("algorithm", "sweep_param", "sweep_value", "trials", "err", "mse", "mean_runtime_s", "seed")

BASE_ALGORITHMS = ("omp", "gomp", "cosamp", "tmp", "oracle", "preselection_only", "noop")
_NMAX_RE = re.compile(r"^tmp_nmax\(?(\d+)\)?$")

MATRIX_KINDS = ("gaussian", "orthonormal", "near_orthonormal", "duplicated")

# extra stream for the random causal sets drawn by run_diagnostics
_CAUSAL_STREAM = 3


def canonical_algorithm(name):
    """Normalise an algorithm name; ``tmp_nmax(10)`` becomes ``tmp_nmax10``."""
    name = name.strip().lower()
    m = _NMAX_RE.match(name)
    if m:
        v = int(m.group(1))
        if v < 1:
            raise ConfigError("tmp_nmax needs a positive cap")
        return f"tmp_nmax{v}"
    if name not in BASE_ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}")
    return name


def _parse_list(text, conv):
    out = []
    for part in str(text).replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b, *step = part.split(":")
            a, b = conv(a), conv(b)
            s = conv(step[0]) if step else 1
            if s <= 0:
                raise ConfigError(f"range step must be positive in {part!r}")
            v = a
            while v <= b + 1e-12:
                out.append(v)
                v += s
        else:
            out.append(conv(part))
    return out


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_optional_int(text):
    t = str(text).strip().lower()
    return None if t in ("", "none", "null") else int(t)


def _parse_snr(text):
    t = str(text).strip().lower()
    return None if t in ("none", "inf", "noiseless") else float(t)


@dataclass
class ExperimentConfig:
    """Parameters of one experiment.

    ``k`` and ``snr`` are sweep axes (lists).  An MSE sweep uses ``k[0]``;
    ``snr`` entries of ``None`` mean noiseless.  The ``l``, ``nmax``,
    ``preselection_size``, ``preselection``, ``iterative_completion``,
    ``epsilon_init`` and ``exact_fit_tol`` fields configure TMP and may be
    written under a ``[tmp]`` section in a config file.
    """

    m: int = 100
    n: int = 256
    k: list = field(default_factory=lambda: [5, 10, 15, 20, 25, 30, 35])
    snr: list = field(default_factory=lambda: [10.0, 20.0, 30.0, 40.0])
    trials: int = 500
    seed: int = 0
    algorithms: list = field(default_factory=lambda: ["omp", "gomp", "cosamp", "tmp"])
    l: int = 2
    nmax: int = None
    preselection_size: int = None
    preselection: str = "gomp"
    iterative_completion: bool = True
    epsilon_init: float = math.inf
    exact_fit_tol: float = 1e-10
    coef: str = "gaussian"
    matrix: str = "gaussian"
    perturbation: float = 0.05
    jobs: int = 1
    out: str = None

    _PARSERS = {
        "m": int, "n": int, "trials": int, "seed": int, "l": int, "jobs": int,
        "k": lambda t: _parse_list(t, int),
        "snr": lambda t: _parse_list(t, _parse_snr),
        "algorithms": lambda t: [a for a in str(t).replace(";", ",").split(",") if a.strip()],
        "nmax": _parse_optional_int,
        "preselection_size": _parse_optional_int,
        "preselection": str,
        "iterative_completion": _parse_bool,
        "epsilon_init": float,
        "exact_fit_tol": lambda t: None if str(t).strip().lower() == "none" else float(t),
        "coef": str, "matrix": str,
        "perturbation": float,
        "out": str,
    }
    _ALIASES = {
        "n_max": "nmax", "preselection-size": "preselection_size",
        "k_list": "k", "snr_list": "snr", "output": "out",
    }

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.m < 1 or self.n < 1:
            raise ConfigError("m and n must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        self.k = [int(v) for v in self.k]
        if not self.k or any(v < 1 or v > self.n for v in self.k):
            raise ConfigError(f"sparsity list must be nonempty with 1 <= k <= n, got {self.k}")
        self.algorithms = [canonical_algorithm(a) for a in self.algorithms]
        if not self.algorithms:
            raise ConfigError("no algorithms selected")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("duplicate algorithm names")
        if self.matrix not in MATRIX_KINDS:
            raise ConfigError(f"unknown matrix kind {self.matrix!r}")
        self.tmp_config(self.k[0])  # validates the TMP knobs

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls) if not f.name.startswith("_")]

    @classmethod
    def canonical_key(cls, key):
        """Map a (possibly dotted or hyphenated) key to a field name."""
        key = key.strip().lower()
        if "." in key:
            section, key = key.split(".", 1)
            if section not in ("tmp", "experiment", "sweep", "bench", "diagnostics"):
                raise ConfigError(f"unknown config section {section!r}")
        key = cls._ALIASES.get(key, key).replace("-", "_")
        if key not in cls.field_names():
            raise ConfigError(f"unknown config key {key!r}")
        return key

    @classmethod
    def from_mapping(cls, mapping, base=None):
        """Build a config from string values, overriding ``base`` (or the defaults)."""
        values = {} if base is None else {n: getattr(base, n) for n in cls.field_names()}
        for raw_key, raw in mapping.items():
            key = cls.canonical_key(raw_key)
            try:
                values[key] = cls._PARSERS[key](raw)
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        return cls(**values)

    def tmp_config(self, k, n_max=None):
        return TmpConfig(
            k=k,
            l=self.l,
            epsilon_init=self.epsilon_init,
            n_max=self.nmax if n_max is None else n_max,
            preselection_size=self.preselection_size,
            preselection=self.preselection,
            iterative_completion=self.iterative_completion,
            exact_fit_tol=self.exact_fit_tol,
        )


def read_config_file(path):
    """Read a ``key = value`` file into a flat dict with dotted section keys.

    Keys before the first ``[section]`` header are top level; a key ``l``
    under ``[tmp]`` becomes ``tmp.l``.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[__top__]\n" + fh.read(), source=str(path))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    flat = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[key if section == "__top__" else f"{section}.{key}"] = value
    return flat


@dataclass
class SweepRecord:
    """Aggregate of one (algorithm, sweep point).

    ``oracle_max_dev`` is the largest ``|x_hat - x_oracle|`` over trials in
    which the algorithm returned the true support (0 if none did); it is
    not written to CSV.
    """

    algorithm: str
    sweep_param: str
    sweep_value: float
    trials: int
    err: float
    mse: float
    mean_runtime_s: float
    seed: int
    oracle_max_dev: float = 0.0
    failures: int = 0

    def csv_row(self):
        f = "{:.10g}".format
        return [self.algorithm, self.sweep_param, f(self.sweep_value), str(self.trials),
                f(self.err), f(self.mse), f(self.mean_runtime_s), str(self.seed)]


def _noop(phi, y):
    return RecoveryResult(support=(), x_hat=np.zeros(phi.shape[1]), residual_norm=float(np.linalg.norm(y)))


def recover(name, phi, y, k, config, truth=None):
    """Run algorithm ``name`` and return its :class:`RecoveryResult`."""
    name = canonical_algorithm(name)
    if name == "omp":
        return fit_on_support(phi, y, omp(phi, y, k))
    if name == "gomp":
        return gomp_estimate(phi, y, k, config.l)
    if name == "cosamp":
        return fit_on_support(phi, y, cosamp(phi, y, k))
    if name == "oracle":
        if truth is None:
            raise ConfigError("oracle needs the true support")
        return oracle_estimator(phi, y, truth)
    if name == "preselection_only":
        pre = preselect(phi, y, config.tmp_config(k))
        return fit_on_support(phi, y, pre.first(k), preselection=pre)
    if name == "noop":
        return _noop(phi, y)
    if name == "tmp":
        return tmp(phi, y, config.tmp_config(k))
    n_max = int(_NMAX_RE.match(name).group(1))
    return tmp(phi, y, config.tmp_config(k, n_max=n_max))


def _run_trial(config, algorithms, k, snr_db, seed):
    inst = make_instance(config.m, config.n, k, seed, snr_db=snr_db, coef=config.coef)
    x = inst.x.dense()
    truth = inst.x.support
    oracle = oracle_estimator(inst.phi, inst.y, truth).x_hat
    out = []
    for name in algorithms:
        start = time.perf_counter()
        try:
            res = recover(name, inst.phi, inst.y, k, config, truth=truth)
            failed = False
        except TreePursuitError as exc:
            logger.warning("%s failed on seed %d: %s", name, seed, exc)
            res, failed = _noop(inst.phi, inst.y), True
        elapsed = time.perf_counter() - start
        hit = res.support == truth
        dev = float(np.max(np.abs(res.x_hat - oracle))) if hit else 0.0
        d = x - res.x_hat
        out.append((hit, float(d @ d) / config.n, elapsed, dev, failed))
    return out


def _run_point(config, algorithms, k, snr_db, sequential=False):
    seeds = [config.seed + t for t in range(config.trials)]
    if config.jobs > 1 and not sequential:
        from joblib import Parallel, delayed

        per_trial = Parallel(n_jobs=config.jobs)(
            delayed(_run_trial)(config, algorithms, k, snr_db, s) for s in seeds
        )
    else:
        per_trial = [_run_trial(config, algorithms, k, snr_db, s) for s in seeds]
    return per_trial


def _aggregate(config, algorithms, per_trial, param, value):
    records = []
    n = len(per_trial)
    for a, name in enumerate(algorithms):
        rows = [trial[a] for trial in per_trial]
        records.append(SweepRecord(
            algorithm=name,
            sweep_param=param,
            sweep_value=value,
            trials=n,
            err=sum(r[0] for r in rows) / n,
            mse=math.fsum(r[1] for r in rows) / n,
            mean_runtime_s=math.fsum(r[2] for r in rows) / n,
            seed=config.seed,
            oracle_max_dev=max(r[3] for r in rows),
            failures=sum(r[4] for r in rows),
        ))
    return records


def _with_preselection(algorithms):
    algs = list(algorithms)
    if any(a == "tmp" or a.startswith("tmp_nmax") for a in algs) and "preselection_only" not in algs:
        algs.append("preselection_only")
    return algs


def run_err_sweep(config):
    """Noiseless ERR against sparsity, one record per (K, algorithm).

    When a TMP variant is requested, a ``preselection_only`` row reports
    the ERR of the pre-selector's own K-index estimate.
    """
    algs = _with_preselection(config.algorithms)
    records = []
    for k in config.k:
        logger.info("err sweep: K=%d, %d trials", k, config.trials)
        per_trial = _run_point(config, algs, k, None)
        records += _aggregate(config, algs, per_trial, "k", k)
    return records


def run_mse_sweep(config):
    """MSE against SNR at sparsity ``config.k[0]``; the Oracle is always included."""
    algs = list(config.algorithms)
    if "oracle" not in algs:
        algs.append("oracle")
    k = config.k[0]
    if "tmp" in algs and config.nmax is None and k > 12 and any(s is not None for s in config.snr):
        logger.warning("uncapped TMP on noisy data grows exponentially with K; consider --nmax")
    records = []
    for snr in config.snr:
        logger.info("mse sweep: K=%d, SNR=%s dB, %d trials", k, snr, config.trials)
        per_trial = _run_point(config, algs, k, snr)
        value = math.inf if snr is None else snr
        records += _aggregate(config, algs, per_trial, "snr_db", value)
    return records


def run_timing(config):
    """Mean wall-clock time per trial against sparsity (noiseless, sequential)."""
    records = []
    for k in config.k:
        logger.info("timing: K=%d, %d trials", k, config.trials)
        per_trial = _run_point(config, config.algorithms, k, None, sequential=True)
        records += _aggregate(config, config.algorithms, per_trial, "k", k)
    return records


def write_records(records, out):
    """Write sweep records as CSV to a path or an open text stream."""
    if hasattr(out, "write"):
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.csv_row())
        return
    with open(out, "w", newline="") as fh:
        write_records(records, fh)


def diagnostic_matrix(kind, m, n, seed, perturbation=0.05):
    """Small test matrices for the diagnostics run.

    ``gaussian``: i.i.d. ``N(0, 1/m)``.  ``orthonormal``: random orthonormal
    columns (needs ``n <= m``).  ``near_orthonormal``: orthonormal columns
    times ``I + perturbation * G / sqrt(n)``.  ``duplicated``: unit-norm
    Gaussian columns with column 1 a copy of column 0.
    """
    if kind == "gaussian":
        return gen_sensing_matrix(m, n, seed)
    rng = np.random.default_rng([int(seed), 0])
    if kind in ("orthonormal", "near_orthonormal"):
        if n > m:
            raise ConfigError(f"{kind} matrix needs n <= m, got {m}x{n}")
        q, _ = np.linalg.qr(rng.standard_normal((m, n)))
        if kind == "orthonormal":
            return q
        return q @ (np.eye(n) + perturbation * rng.standard_normal((n, n)) / math.sqrt(n))
    if kind == "duplicated":
        if n < 2:
            raise ConfigError("duplicated matrix needs n >= 2")
        phi = rng.standard_normal((m, n))
        phi /= np.linalg.norm(phi, axis=0)
        phi[:, 1] = phi[:, 0]
        return phi
    raise ConfigError(f"unknown matrix kind {kind!r}")


def _tree_rows(config, inst, rep, instance_id):
    """Empirical checks of the exact and stable recovery guarantees."""
    cfg = TmpConfig(k=inst.k, l=config.l, preselection="all")
    try:
        res = tmp(inst.phi, inst.y, cfg)
        hit = res.support == inst.x.support
        err = float(np.linalg.norm(inst.x.dense() - res.x_hat))
    except TreePursuitError as exc:
        logger.warning("TMP failed on instance %d: %s", instance_id, exc)
        hit, err = False, math.nan
    noiseless = inst.snr_db is None
    na = analysis.NOT_APPLICABLE

    def verdict(premise, ok):
        if not premise:
            return na
        return analysis.HOLDS if ok else analysis.VIOLATED

    f = analysis._fmt
    noisy_ok = bool(rep.cond_noisy) and not noiseless
    bound = rep.error_bound
    return [
        ("exact_recovery", instance_id, f(int(hit)), "1", verdict(rep.cond_q and noiseless, hit)),
        ("noisy_recovery", instance_id, f(int(hit)), "1", verdict(noisy_ok, hit)),
        ("recovery_error", instance_id, f(err), f(bound),
         verdict(noisy_ok and bound is not None, bound is not None and err <= bound + analysis.VERDICT_SLACK)),
    ]


def run_diagnostics(config):
    """Brute-force RIC and bound verdicts on ``config.trials`` tiny instances.

    Instance ``t`` uses matrix kind ``config.matrix`` with seed
    ``config.seed + t``, sparsity ``config.k[0]`` and SNR ``config.snr[0]``
    (``None`` for noiseless).  A random causal subset of the support is
    drawn per instance.  Returns the report rows (see
    :data:`treepursuit.analysis.REPORT_HEADER`).
    """
    k = config.k[0]
    snr = config.snr[0] if config.snr else None
    m, n, l = config.m, config.n, config.l
    k_max = min(n, max(m, 2 * k, l + k, k + 1))
    rows = []
    for t in range(config.trials):
        seed = config.seed + t
        phi = diagnostic_matrix(config.matrix, m, n, seed, config.perturbation)
        ric = analysis.ric_bruteforce(phi, k_max, matrix_id=str(seed))
        x = gen_sparse_signal(n, k, seed, coef=config.coef)
        inst = add_noise_for_snr(phi, x, snr, seed)
        rng = np.random.default_rng([seed, _CAUSAL_STREAM])
        size = int(rng.integers(0, k))
        causal = tuple(int(j) for j in rng.choice(x.support, size=size, replace=False))
        diag = analysis.evaluate_bounds(ric, inst, causal, l=l)
        rows += analysis.bound_rows(diag, seed)
        rep = analysis.check_recovery_conditions(
            ric, m, k, l, min_abs_x=float(np.min(np.abs(x.values))),
            noise_norm=float(np.linalg.norm(inst.v)))
        rows += analysis.condition_rows(rep, seed, ric)
        rows += _tree_rows(config, inst, rep, seed)
    return rows
