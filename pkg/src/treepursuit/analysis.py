"""Brute-force restricted isometry constants and numerical bound checks.

Everything here is meant for tiny matrices (N around a dozen columns) where
every support of a given size can be enumerated.  The measured correlation
extremes of an instance are compared against the right-hand sides of the
RIP-based inequalities that underpin TMP's recovery guarantees.

Notation
--------
``T`` is the true support, ``s`` a causal set with ``s <= T`` and ``r`` the
residual of ``y`` after projecting out ``phi[:, s]``.

===========  ==========================================================
lambda_i     min over ``u`` in ``T - s`` of ``|phi_u' r|`` (noiseless)
gamma_i      max over ``u`` outside ``T`` of ``|phi_u' r|`` (noiseless)
beta_i       ``lambda_i`` measured on a noisy residual
alpha_i      ``gamma_i`` measured on a noisy residual
rho          max over ``j`` in ``T`` of ``|phi_j' y|``
eta          L-th largest ``|phi_j' y|`` over ``j`` outside ``T``
===========  ==========================================================
"""

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CausalNotTrue, MissingRicOrder, TooLarge
from .linalg import as_support, residual
from .recovery.greedy import MAX_ENUMERATION

#: Absolute slack applied to every bound verdict.
VERDICT_SLACK = 1e-9

HOLDS, VIOLATED, NOT_APPLICABLE = "holds", "violated", "not-applicable"

# supports per batched eigenvalue call
_BATCH = 4096


@dataclass
class RicTable:
    """Restricted isometry constants ``delta[k]`` for ``k = 1..exact_up_to``.

    ``lam_min[k]`` and ``lam_max[k]`` hold the extreme Gram eigenvalues over
    all size-``k`` supports.
    """

    delta: dict
    exact_up_to: int
    matrix_id: str = ""
    lam_min: dict = field(default_factory=dict)
    lam_max: dict = field(default_factory=dict)

    def get(self, k):
        """``delta_k`` or ``None`` when the order was not computed.

        ``delta_0`` is 0 by convention.
        """
        if k == 0:
            return 0.0
        return self.delta.get(k)

    def require(self, k):
        d = self.get(k)
        if d is None:
            raise MissingRicOrder(f"delta_{k} not in table (computed up to {self.exact_up_to})")
        return d


def _support_count_guard(n, k_max):
    for k in range(1, k_max + 1):
        c = math.comb(n, k)
        if c > MAX_ENUMERATION:
            raise TooLarge(f"C({n}, {k}) = {c} supports exceeds {MAX_ENUMERATION}")


def ric_bruteforce(phi, k_max, matrix_id=""):
    """Exact ``delta_k`` for ``k <= k_max`` by enumerating every support.

    ``delta_k`` is the largest of ``|lambda_max(G) - 1|`` and
    ``|1 - lambda_min(G)|`` over the Gram matrices ``G = phi_s' phi_s`` with
    ``|s| = k``.

    Raises
    ------
    TooLarge
        If any order needs more than ``10**6`` supports.
    """
    phi = np.asarray(phi, dtype=float)
    n = phi.shape[1]
    k_max = min(int(k_max), n)
    _support_count_guard(n, k_max)
    gram = phi.T @ phi
    delta, lo, hi = {}, {}, {}
    for k in range(1, k_max + 1):
        lmin, lmax = math.inf, -math.inf
        combos = itertools.combinations(range(n), k)
        while True:
            idx = np.array(list(itertools.islice(combos, _BATCH)), dtype=int)
            if idx.size == 0:
                break
            g = gram[idx[:, :, None], idx[:, None, :]]
            ev = np.linalg.eigvalsh(g)
            lmin = min(lmin, float(ev[:, 0].min()))
            lmax = max(lmax, float(ev[:, -1].max()))
        lo[k], hi[k] = lmin, lmax
        delta[k] = max(lmax - 1.0, 1.0 - lmin, 0.0)
    return RicTable(delta=delta, exact_up_to=k_max, matrix_id=matrix_id, lam_min=lo, lam_max=hi)


@dataclass
class BoundDiagnostics:
    """Measured correlation extremes, bound right-hand sides and verdicts.

    Bounds and constants that could not be evaluated are ``None``;
    ``verdicts`` maps a check name to ``"holds"``, ``"violated"`` or
    ``"not-applicable"``.
    """

    lambda_i: float = None
    gamma_i: float = None
    beta_i: float = None
    alpha_i: float = None
    rho: float = None
    eta: float = None
    bound_lambda: float = None
    bound_gamma: float = None
    bound_beta: float = None
    bound_alpha: float = None
    bound_rho: float = None
    bound_eta: float = None
    mu: float = None
    omega: float = None
    nu: float = None
    gamma_cond: float = None
    tau: float = None
    q_order: int = None
    verdicts: dict = field(default_factory=dict)


def _instance_parts(instance):
    phi = np.asarray(instance.phi, dtype=float)
    truth = as_support(instance.x.support)
    return phi, np.asarray(instance.y, dtype=float), truth


def _check_causal(causal, truth):
    causal = as_support(causal)
    if not set(causal) <= set(truth):
        raise CausalNotTrue(f"causal set {causal} is not contained in the true support")
    return causal


def measure_correlation_extremes(instance, causal, l=2):
    """Measure lambda, gamma, beta, alpha, rho and eta on one instance.

    ``beta_i``/``alpha_i`` share the definitions of ``lambda_i``/``gamma_i``
    and are reported separately because their bounds carry noise terms.
    A minimum over an empty index set is reported as 0.
    """
    phi, y, truth = _instance_parts(instance)
    causal = _check_causal(causal, truth)
    n = phi.shape[1]
    rest = [u for u in truth if u not in causal]
    outside = [u for u in range(n) if u not in truth]
    c_r = np.abs(phi.T @ residual(phi, y, causal))
    c_y = np.abs(phi.T @ y)
    lam = float(c_r[rest].min()) if rest else 0.0
    gam = float(c_r[outside].max()) if outside else 0.0
    rho = float(c_y[list(truth)].max())
    if 1 <= l <= len(outside):
        eta = float(np.sort(c_y[outside])[::-1][l - 1])
    else:
        eta = None
    return BoundDiagnostics(lambda_i=lam, gamma_i=gam, beta_i=lam, alpha_i=gam, rho=rho, eta=eta)


def _verdict(measured, bound, direction):
    if measured is None or bound is None:
        return NOT_APPLICABLE
    if direction == ">=":
        ok = measured >= bound - VERDICT_SLACK
    else:
        ok = measured <= bound + VERDICT_SLACK
    return HOLDS if ok else VIOLATED


def evaluate_bounds(ric, instance, causal, l=2):
    """Evaluate the six correlation bounds on ``(instance, causal)``.

    Checks (``e = ||x_{T-s}||``, ``d_k = delta_k``):

    * lambda_lower: ``lambda_i >= (1 - d_K - d_M) / (1 - d_K) e``, noiseless only
    * gamma_upper: ``gamma_i <= d_{K+1} / (1 - d_K) e``, noiseless only
    * rho_lower: ``rho >= [(1 - d_K) ||x_T|| - sqrt(1 + d_K) ||v||] / sqrt(K)``
    * eta_upper: ``eta <= [d_{L+K} ||x_T|| + sqrt(1 + d_L) ||v||] / sqrt(L)``
    * beta_lower: ``beta_i >= (1 - d_M - d_{K+1} d_K / (1 - d_K)) e - sqrt(1 + d_M) ||v||``
    * alpha_upper: ``alpha_i <= (d_{K+1} + d_{K+1} d_K / (1 - d_K)) e + sqrt(1 + d_M) ||v||``

    A check is not-applicable when a denominator is not positive or a
    required ``delta`` order is missing from ``ric``.

    Raises
    ------
    MissingRicOrder
        If ``delta_K`` itself is unavailable.
    CausalNotTrue
    """
    phi, y, truth = _instance_parts(instance)
    diag = measure_correlation_extremes(instance, causal, l=l)
    causal = _check_causal(causal, truth)
    m = phi.shape[0]
    k = len(truth)
    dk = ric.require(k)
    dk1, dm = ric.get(k + 1), ric.get(m)
    dlk, dl = ric.get(l + k), ric.get(l)

    x = instance.x.dense()
    rest = [u for u in truth if u not in causal]
    e = float(np.linalg.norm(x[rest]))
    xt = float(np.linalg.norm(x))
    vn = float(np.linalg.norm(instance.v))
    noiseless = vn == 0.0
    den = 1.0 - dk

    if den > 0 and dm is not None and noiseless:
        diag.bound_lambda = (1.0 - dk - dm) / den * e
    if den > 0 and dk1 is not None and noiseless:
        diag.bound_gamma = dk1 / den * e
    diag.bound_rho = ((1.0 - dk) * xt - math.sqrt(1.0 + dk) * vn) / math.sqrt(k)
    if dlk is not None and dl is not None and diag.eta is not None:
        diag.bound_eta = (dlk * xt + math.sqrt(1.0 + dl) * vn) / math.sqrt(l)
    if den > 0 and dk1 is not None and dm is not None:
        cross = dk1 * dk / den
        diag.bound_beta = (1.0 - dm - cross) * e - math.sqrt(1.0 + dm) * vn
        diag.bound_alpha = (dk1 + cross) * e + math.sqrt(1.0 + dm) * vn

    diag.verdicts = {
        "lambda_lower": _verdict(diag.lambda_i, diag.bound_lambda, ">="),
        "gamma_upper": _verdict(diag.gamma_i, diag.bound_gamma, "<="),
        "rho_lower": _verdict(diag.rho, diag.bound_rho, ">="),
        "eta_upper": _verdict(diag.eta, diag.bound_eta, "<="),
        "beta_lower": _verdict(diag.beta_i, diag.bound_beta, ">="),
        "alpha_upper": _verdict(diag.alpha_i, diag.bound_alpha, "<="),
    }
    return diag


@dataclass
class ConditionReport:
    """Recovery-condition verdicts and constants for one matrix.

    Condition flags are ``True``/``False`` or ``None`` when the needed
    ``delta`` order is missing.  ``cond_noisy`` is ``None`` unless both
    ``min_abs_x`` and ``noise_norm`` were supplied; ``error_bound`` is
    ``tau * noise_norm``.
    """

    k: int
    l: int
    m: int
    q_order: int
    cond_lk: bool = None
    cond_m: bool = None
    cond_q: bool = None
    cond_noisy: bool = None
    mu: float = None
    omega: float = None
    nu: float = None
    gamma_cond: float = None
    tau: float = None
    error_bound: float = None
    thresholds: dict = field(default_factory=dict)

    def status(self, name):
        flag = getattr(self, name)
        if flag is None:
            return NOT_APPLICABLE
        return "satisfied" if flag else "unsatisfied"


def _positive(den):
    return den > 0 and math.isfinite(den)


def check_recovery_conditions(ric, m, k, l, min_abs_x=None, noise_norm=None):
    """Evaluate the sufficient conditions for exact and stable TMP recovery.

    Conditions (``d_k = delta_k``, ``Q = max(M, L + K)``):

    * cond_lk: ``d_{L+K} < sqrt(L) / (sqrt(L) + sqrt(K))``
    * cond_m: ``d_M < 1/3``
    * cond_q: ``d_Q < 1/3`` when ``K < 4L``, else ``d_Q < sqrt(L) / (sqrt(L) + sqrt(K))``
    * cond_noisy: ``min |x_j| > gamma ||v||`` with ``gamma = max(nu, mu, omega)``

    where

    .. math::

        \\mu = \\frac{2(1-d_K)}{1-3d_{2K}},\\quad
        \\omega = \\frac{2(1-d_K)\\sqrt{1+d_M}}{1-d_K-d_{K+1}-d_M},\\quad
        \\nu = \\frac{(\\sqrt K+\\sqrt L)\\sqrt{1+d_{L+K}}}{\\sqrt L(1-d_K)-\\sqrt K d_{L+K}}

    and the reconstruction error bound is ``tau ||v||`` with
    ``tau = ((gamma + 1)(1 - d_K) + 2 gamma d_{2K}) / ((1 - d_K) sqrt(1 - d_{2K}))``.

    Constants whose denominator is not positive are ``None``.

    Raises
    ------
    MissingRicOrder
        If ``delta_K`` is unavailable.
    """
    dk = ric.require(k)
    q = max(m, l + k)
    rep = ConditionReport(k=k, l=l, m=m, q_order=q)
    sl, sk = math.sqrt(l), math.sqrt(k)
    ratio = sl / (sl + sk)
    rep.thresholds = {"cond_lk": ratio, "cond_m": 1.0 / 3.0,
                      "cond_q": 1.0 / 3.0 if k < 4 * l else ratio}

    dlk, dm, dq = ric.get(l + k), ric.get(m), ric.get(q)
    d2k, dk1 = ric.get(2 * k), ric.get(k + 1)
    if dlk is not None:
        rep.cond_lk = dlk < ratio
    if dm is not None:
        rep.cond_m = dm < 1.0 / 3.0
    if dq is not None:
        rep.cond_q = dq < rep.thresholds["cond_q"]

    if d2k is not None and _positive(1.0 - 3.0 * d2k):
        rep.mu = 2.0 * (1.0 - dk) / (1.0 - 3.0 * d2k)
    if dm is not None and dk1 is not None and _positive(1.0 - dk - dk1 - dm):
        rep.omega = 2.0 * (1.0 - dk) * math.sqrt(1.0 + dm) / (1.0 - dk - dk1 - dm)
    if dlk is not None and _positive(sl * (1.0 - dk) - sk * dlk):
        rep.nu = (sk + sl) * math.sqrt(1.0 + dlk) / (sl * (1.0 - dk) - sk * dlk)
    if None not in (rep.mu, rep.omega, rep.nu):
        rep.gamma_cond = max(rep.nu, rep.mu, rep.omega)
        if d2k < 1.0 and dk < 1.0:
            g = rep.gamma_cond
            rep.tau = ((g + 1.0) * (1.0 - dk) + 2.0 * g * d2k) / ((1.0 - dk) * math.sqrt(1.0 - d2k))
    if rep.gamma_cond is not None and min_abs_x is not None and noise_norm is not None:
        rep.cond_noisy = min_abs_x > rep.gamma_cond * noise_norm
        if rep.tau is not None:
            rep.error_bound = rep.tau * noise_norm
    return rep


REPORT_HEADER = ("check", "instance_id", "measured", "bound", "verdict")

_BOUND_FIELDS = {
    "lambda_lower": ("lambda_i", "bound_lambda"),
    "gamma_upper": ("gamma_i", "bound_gamma"),
    "rho_lower": ("rho", "bound_rho"),
    "eta_upper": ("eta", "bound_eta"),
    "beta_lower": ("beta_i", "bound_beta"),
    "alpha_upper": ("alpha_i", "bound_alpha"),
}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    return f"{float(v):.10g}"


def bound_rows(diag, instance_id):
    """Report rows ``(check, instance_id, measured, bound, verdict)`` for a diagnostics record."""
    rows = []
    for name, (meas, bnd) in _BOUND_FIELDS.items():
        rows.append((name, instance_id, _fmt(getattr(diag, meas)), _fmt(getattr(diag, bnd)),
                     diag.verdicts.get(name, NOT_APPLICABLE)))
    return rows


def condition_rows(rep, instance_id, ric):
    """Report rows for a :class:`ConditionReport`; ``measured`` is the relevant ``delta``."""
    orders = {"cond_lk": rep.l + rep.k, "cond_m": rep.m, "cond_q": rep.q_order}
    rows = []
    for name, order in orders.items():
        rows.append((name, instance_id, _fmt(ric.get(order)), _fmt(rep.thresholds[name]), rep.status(name)))
    for name in ("mu", "omega", "nu", "gamma_cond", "tau"):
        val = getattr(rep, name)
        rows.append((name, instance_id, _fmt(val), "", NOT_APPLICABLE if val is None else "computed"))
    return rows


def write_report(rows, out):
    """Write report rows as CSV to a path or an open text stream."""
    if hasattr(out, "write"):
        w = csv.writer(out, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        w.writerows(rows)
        return
    with open(out, "w", newline="") as fh:
        write_report(rows, fh)
