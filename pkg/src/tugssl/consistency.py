"""
Consistency certificates
========================

Runtime checks of the error, Lipschitz and band-classification bounds for
p-Laplacian learning, the delta/beta diagnostic for geometric graphs, and the
stochastic-block-model machinery (per-vertex rates, the deterministic
sufficient condition, and the r/q threshold with its probability bound).

Each certificate returns a `Certificate` whose `to_dict` gives the JSON
report fields ``name, applicable, holds, bound, observed, parameters``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .graph import boundary_band, check_A1, delta, grad_sup_norm
from .solver import _as_p, classify

log = logging.getLogger(__name__)


@dataclass
class Certificate:
    name: str
    applicable: bool
    holds: bool | None
    bound: float | None
    observed: float | None
    parameters: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        def clean(v):
            if isinstance(v, (np.floating, float)):
                v = float(v)
                return None if math.isnan(v) else (str(v) if math.isinf(v) else v)
            if isinstance(v, np.integer):
                return int(v)
            if isinstance(v, np.ndarray):
                return [clean(x) for x in v.tolist()]
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            return v

        d = {
            "name": self.name,
            "applicable": self.applicable,
            "holds": self.holds,
            "bound": clean(self.bound),
            "observed": clean(self.observed),
            "parameters": clean(self.parameters),
        }
        if self.notes:
            d["notes"] = list(self.notes)
        return d


def _inapplicable(name, reason, **params):
    return Certificate(name, False, None, None, None, params, [reason])


def exit_rate(alpha, delta_):
    """Per-step lower bound on the probability of hitting the labels: (1-a)/2 + a*delta."""
    return 0.5 * (1.0 - alpha) + alpha * delta_


def kappa(p, delta_):
    """Smallest integer strictly larger than 2 log 2 / (1 - alpha + 2 alpha delta)."""
    if not delta_ > 0:
        raise ArgumentError("delta must be positive (every vertex needs a labeled neighbor)")
    if delta_ > 1:
        raise ArgumentError("delta cannot exceed 1")
    a = _as_p(p).alpha
    value = 2.0 * math.log(2.0) / (1.0 - a + 2.0 * a * delta_)
    return int(math.floor(value)) + 1


def _truth(labels):
    if labels.truth is None:
        raise ArgumentError("certificate needs a LabelSet with ground truth")
    return labels.truth


def _error_bound_terms(g, labels, p):
    truth = _truth(labels)
    a = _as_p(p).alpha
    d = delta(g, labels)
    zeta = grad_sup_norm(g, truth)
    gnorm = float(np.max(np.abs(truth)))
    notes = []
    if zeta == 0.0:
        # zeta * log(1/zeta) -> 0
        log_term = 0.0
        bound_scale = 0.0
    else:
        log_term = math.log(gnorm / zeta) if gnorm > 0 else -math.inf
        bound_scale = zeta
        if log_term < 0:
            notes.append("negative log term: gradient norm exceeds sup norm")
    params = {"p": str(_as_p(p)), "alpha": a, "delta": d, "grad_sup_norm": zeta, "sup_norm": gnorm}
    return log_term, bound_scale, 1.0 - a + 2.0 * a * d, params, notes


def th1_certificate(g, labels, u, p):
    """|u - g| <= (2 log(|g|/|grad g|) / (1 - a + 2 a delta) + 2) |grad g| at every vertex."""
    if not check_A1(g, labels):
        return _inapplicable("th1_error_bound", "some vertex has no labeled neighbor", p=str(_as_p(p)))
    log_term, zeta, denom, params, notes = _error_bound_terms(g, labels, p)
    bound = (2.0 * log_term / denom + 2.0) * zeta if zeta > 0 else 0.0
    observed = float(np.max(np.abs(np.asarray(u) - labels.truth)))
    return Certificate("th1_error_bound", True, observed <= bound, bound, observed, params, notes)


def th3_certificate(g, labels, u, p):
    """|u(x) - u(y)| <= (4 log(|g|/|grad g|) / (1 - a + 2 a delta) + 5) |grad g| on every edge."""
    if not check_A1(g, labels):
        return _inapplicable("th3_lipschitz_bound", "some vertex has no labeled neighbor", p=str(_as_p(p)))
    log_term, zeta, denom, params, notes = _error_bound_terms(g, labels, p)
    bound = (4.0 * log_term / denom + 5.0) * zeta if zeta > 0 else 0.0
    observed = grad_sup_norm(g, np.asarray(u, dtype=np.float64))
    return Certificate("th3_lipschitz_bound", True, observed <= bound, bound, observed, params, notes)


def th2_certificate(g, labels, u, p):
    """Every vertex farther than kappa hops from the other class is classified correctly.

    The returned certificate carries ``kappa``, ``band`` and ``violations`` in
    its parameters; `observed` is the number of violations.
    """
    if not check_A1(g, labels):
        return _inapplicable("th2_band_classification", "some vertex has no labeled neighbor",
                             p=str(_as_p(p)))
    truth = _truth(labels)
    d = delta(g, labels)
    k = kappa(p, d)
    band = boundary_band(g, truth, k)
    outside = np.ones(g.n, dtype=bool)
    outside[band] = False
    wrong = classify(u) != truth.astype(np.int64)
    violations = np.flatnonzero(outside & wrong)
    params = {"p": str(_as_p(p)), "delta": d, "kappa": k, "band": band, "violations": violations,
              "band_size": len(band)}
    return Certificate("th2_band_classification", True, len(violations) == 0, float(k),
                       float(len(violations)), params)


def delta_beta_ratio(g, labels, beta):
    """Observed delta / beta; stays bounded below as n grows on geometric graphs."""
    if not beta > 0:
        raise ArgumentError("beta must be positive")
    return delta(g, labels) / beta


@dataclass
class SbmRates:
    gamma: np.ndarray
    beta_frac: np.ndarray
    gamma_max: float
    beta_min: float
    flagged: np.ndarray


def sbm_rates(g, truth, labels):
    """Per-vertex inter-class weight fraction and labeled same-class weight fraction.

    Vertices with no same-class neighbor are flagged, get NaN for beta_i and
    are left out of beta_min.
    """
    truth = np.asarray(truth)
    if not np.all((truth == 0) | (truth == 1)):
        raise ArgumentError("truth must be binary")
    c = truth.astype(bool)
    m = labels.mask(g.n)
    W = g.W
    to1 = W @ c.astype(np.float64)
    deg = g.degrees
    to0 = deg - to1
    same = np.where(c, to1, to0)
    other = deg - same
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(deg > 0, other / deg, np.nan)
        lab1 = W @ (m & c).astype(np.float64)
        lab0 = W @ (m & ~c).astype(np.float64)
        lab_same = np.where(c, lab1, lab0)
        beta_i = np.where(same > 0, lab_same / same, np.nan)
    flagged = np.flatnonzero(~(same > 0))
    if len(flagged):
        log.warning("%d vertices have no same-class neighbor; excluded from beta_min", len(flagged))
    gmax = float(np.nanmax(gamma)) if np.isfinite(gamma).any() else math.nan
    bmin = float(np.nanmin(beta_i)) if np.isfinite(beta_i).any() else math.nan
    return SbmRates(gamma, beta_i, gmax, bmin, flagged)


def suff_condition_check(rates):
    """beta_min > gamma_max / (1 - gamma_max); false when gamma_max = 1 or rates are undefined."""
    gm, bm = rates.gamma_max, rates.beta_min
    if math.isnan(gm) or math.isnan(bm) or gm >= 1.0:
        return False
    return bool(bm > gm / (1.0 - gm))


@dataclass
class SbmCertificate:
    sigma1: float
    sigma2: float
    sigma: float
    threshold: float
    ratio_times_beta: float
    condition_holds: bool
    probability_bound: float

    def to_dict(self):
        return Certificate("sbm_threshold", True, self.condition_holds, self.threshold,
                           self.ratio_times_beta,
                           {"sigma1": self.sigma1, "sigma2": self.sigma2, "sigma": self.sigma,
                            "probability_bound": self.probability_bound}).to_dict()


def _check_slack(sigma1, sigma2):
    if sigma1 < 0:
        raise ArgumentError("sigma1 must be >= 0")
    if not 0 <= sigma2 < 1:
        raise ArgumentError("sigma2 must lie in [0, 1)")


def sbm_probability_bound(spec, beta, sigma1, sigma2, literal=False):
    """Lower bound on the probability that the rate bounds hold at every vertex.

    The failure terms are summed (union bound). ``literal=True`` instead
    subtracts the second term inside the braces, as printed in the source
    statement; that variant can exceed 1.
    """
    _check_slack(sigma1, sigma2)
    N = (spec.N0, spec.N1)
    total = 0.0
    for j in (0, 1):
        t1 = math.exp(-spec.q * N[1 - j] * sigma1 ** 2 / (2.0 * (1.0 + sigma1 / 3.0)))
        t2 = 3.0 * math.exp(-beta * spec.r * N[j] * sigma2 ** 2 / 8.0)
        total += N[j] * ((t1 - t2) if literal else (t1 + t2))
    return 1.0 - total


def sbm_rate_bounds(spec, beta, sigma1, sigma2):
    """High-probability bounds: (gamma upper bound for class 0, for class 1, beta_i lower bound)."""
    _check_slack(sigma1, sigma2)
    N = (spec.N0, spec.N1)
    out = []
    for j in (0, 1):
        inter = (1 + sigma1) * spec.q * N[1 - j]
        intra = (1 - sigma2) * spec.r * (N[j] - 1)
        out.append(inter / (inter + intra) if inter + intra > 0 else 0.0)
    return out[0], out[1], (1 - sigma2) / (1 + sigma2) * beta


def sbm_threshold_check(spec, beta, sigma1=0.0, sigma2=0.0, literal=False):
    """(r/q) beta > (1 + sigma) max{N0/(N1 - 1), N1/(N0 - 1)}."""
    _check_slack(sigma1, sigma2)
    if not 0 < beta <= 1:
        raise ArgumentError("beta must lie in (0, 1]")
    if not spec.q > 0:
        raise ArgumentError("q must be positive for the r/q threshold")
    sigma = (1 + sigma1) * (1 + sigma2) / (1 - sigma2) ** 2 - 1
    threshold = (1 + sigma) * max(spec.N0 / (spec.N1 - 1), spec.N1 / (spec.N0 - 1))
    lhs = spec.r / spec.q * beta
    return SbmCertificate(sigma1, sigma2, sigma, threshold, lhs, lhs > threshold,
                          sbm_probability_bound(spec, beta, sigma1, sigma2, literal))
