"""Core certificate algebra: the coupling lemma, Hellinger/TV bounds, and
the Bernoulli mixing coupling with its exact total-variation formula.

The central inequality: for X, Y on one probability space and any interval
[a, b],

    P(a <= X <= b) <= (1 + P(|X - Y| <= b - a) + d_TV(law X, law Y)) / 2.

Everything in this module feeds that bound: analytic TV upper bounds from
affinity products, Monte-Carlo estimates of the closeness probability with a
distribution-free confidence correction, and the sliding-window estimator of
the empirical concentration function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, SizeError
from .rng import uniform_open

PLAN_KINDS = ("scale", "mixing", "nonlinear", "edge-graded")


def _check_unit(value, name):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return value


def anti_concentration_bound(p_close, tv):
    """Upper bound on any interval probability from a coupling.

    ``p_close`` is P(|X - Y| <= interval length), ``tv`` the total-variation
    distance between the two marginal laws.
    """
    p_close = _check_unit(p_close, "p_close")
    tv = _check_unit(tv, "tv")
    return min(1.0, 0.5 * (1.0 + p_close + tv))


def tv_upper_from_affinity(rho):
    """Total variation is at most sqrt(1 - rho^2) at Hellinger affinity rho."""
    rho = _check_unit(rho, "rho")
    return math.sqrt((1.0 - rho) * (1.0 + rho))


def product_affinity(rhos):
    """Affinity of product measures: the product of per-coordinate affinities."""
    rhos = np.asarray(rhos, dtype=float)
    if rhos.size == 0:
        return 1.0
    if np.any(rhos < 0.0) or np.any(rhos > 1.0):
        raise DomainError("affinities must lie in [0, 1]")
    return float(np.prod(rhos))


def _tv_from_affinities(rhos):
    rhos = np.asarray(rhos, dtype=float)
    if rhos.size == 0:
        return 0.0
    if np.any(rhos <= 0.0):
        return 1.0
    # 1 - prod(rho^2) evaluated in log space to keep precision near rho = 1
    log_sq = 2.0 * np.sum(np.log(rhos))
    return math.sqrt(-math.expm1(min(log_sq, 0.0)))


@dataclass(frozen=True)
class PerturbationPlan:
    """Per-coordinate perturbation strengths with affinity lower bounds."""

    kind: str
    eps_values: np.ndarray
    affinity_lower_bounds: np.ndarray

    def __post_init__(self):
        if self.kind not in PLAN_KINDS:
            raise DomainError(f"unknown plan kind {self.kind!r}")
        eps = np.asarray(self.eps_values, dtype=float)
        rho = np.asarray(self.affinity_lower_bounds, dtype=float)
        if eps.shape != rho.shape or eps.ndim != 1:
            raise DomainError("eps and affinity vectors must be equal-length 1-d")
        if np.any(rho < 0.0) or np.any(rho > 1.0):
            raise DomainError("affinity lower bounds must lie in [0, 1]")
        if self.kind == "scale" and np.any(np.abs(eps) >= 0.5):
            raise DomainError("scale perturbations need |eps| < 1/2")
        object.__setattr__(self, "eps_values", eps)
        object.__setattr__(self, "affinity_lower_bounds", rho)

    @property
    def coordinate_count(self):
        return int(self.eps_values.size)


def product_tv_bound(plan):
    """TV bound sqrt(1 - prod rho_i^2) over the plan's coordinates."""
    return _tv_from_affinities(plan.affinity_lower_bounds)


def bernoulli_coordinate_affinity(eps):
    """Affinity between Bernoulli(1/2) and Bernoulli((1+eps)/2)."""
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must lie in [0, 1), got {eps}")
    return 0.5 * (math.sqrt(1.0 + eps) + math.sqrt(1.0 - eps))


def bernoulli_mixing_coupling(n, alpha, rng):
    """Couple fair coin flips X with the upward mixture X'.

    Each X'_i equals X_i with probability 1 - eps and is forced to 1 with
    probability eps, where eps = alpha / sqrt(n).  The marginal of X' is then
    i.i.d. Bernoulli((1+eps)/2), and X'_i = X_i + 1 exactly when the forcing
    fires on a zero coordinate, which has probability eps / 2.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"need n >= 1 coordinates, got {n}")
    eps = float(alpha) / math.sqrt(n)
    if eps < 0.0 or eps >= 1.0:
        raise DomainError(f"alpha / sqrt(n) = {eps} must lie in [0, 1)")
    base = uniform_open(rng, n)
    force = uniform_open(rng, n)
    x = (base < 0.5).astype(np.int8)
    x_prime = np.where(force < eps, np.int8(1), x)
    return x, x_prime


def bernoulli_exact_tv(n, eps):
    """Exact TV between Bernoulli(1/2)^n and Bernoulli((1+eps)/2)^n.

    Evaluates (1/2) sum_k C(n,k) |2^-n - ((1+eps)/2)^k ((1-eps)/2)^(n-k)|
    with log-space binomials and compensated summation.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if n > 100000:
        raise SizeError(f"n = {n} risks overflow; supported up to 100000")
    eps = float(eps)
    if eps < 0.0 or eps >= 1.0:
        raise DomainError(f"eps must lie in [0, 1), got {eps}")
    if eps == 0.0:
        return 0.0
    k = np.arange(n + 1, dtype=float)
    log_choose = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    log_fair = log_choose - n * math.log(2.0)
    log_tilted = (
        log_choose
        + k * math.log((1.0 + eps) / 2.0)
        + (n - k) * math.log((1.0 - eps) / 2.0)
    )
    diffs = np.abs(np.exp(log_fair) - np.exp(log_tilted))
    return 0.5 * math.fsum(diffs.tolist())


def empirical_concentration_function(samples, l):
    """Largest fraction of samples inside any closed interval of length l.

    ``samples`` must be sorted.  A two-pointer sweep over windows anchored at
    sample points realizes the exact supremum of the empirical measure over
    closed intervals; ties at window edges count inclusively.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise DomainError("need at least one sample")
    if float(l) < 0.0:
        raise DomainError(f"window length must be nonnegative, got {l}")
    if np.any(np.diff(samples) < 0.0):
        raise DomainError("samples must be sorted nondecreasing")
    right = np.searchsorted(samples, samples + float(l), side="right")
    counts = right - np.arange(samples.size)
    return float(counts.max()) / float(samples.size)


def hoeffding_slack(n, confidence):
    """Two-sided Hoeffding deviation for a mean of n indicator samples."""
    n = int(n)
    if n < 1:
        raise DomainError("need at least one sample")
    confidence = float(confidence)
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence}")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass(frozen=True)
class CouplingCertificate:
    """Certified upper bound on interval probabilities at scale delta.

    The bound combines the estimated closeness probability (inflated by the
    Hoeffding slack) with the analytic TV bound through the coupling lemma.
    """

    delta: float
    p_close_hat: float
    p_close_slack: float
    tv_bound: float
    confidence: float
    bound: float = field(init=False)

    def __post_init__(self):
        if self.delta < 0.0:
            raise DomainError("delta must be nonnegative")
        _check_unit(self.p_close_hat, "p_close_hat")
        if self.p_close_slack < 0.0:
            raise DomainError("slack must be nonnegative")
        _check_unit(self.tv_bound, "tv_bound")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError("confidence must lie in (0, 1)")
        p_upper = min(1.0, self.p_close_hat + self.p_close_slack)
        object.__setattr__(
            self, "bound", min(1.0, 0.5 * (1.0 + p_upper + self.tv_bound))
        )


def certify(samples_close_indicator, tv_bound, confidence, delta=0.0):
    """Assemble a certificate from Monte-Carlo closeness indicators.

    The TV bound must come from the analytic affinity machinery; the only
    stochastic error in the certificate is the closeness estimate, which is
    inflated by a two-sided Hoeffding correction at the given confidence.
    """
    ind = np.asarray(samples_close_indicator)
    if ind.size == 0:
        raise DomainError("need a nonempty indicator vector")
    ind = ind.astype(float)
    if np.any((ind != 0.0) & (ind != 1.0)):
        raise DomainError("indicators must be 0/1")
    slack = hoeffding_slack(ind.size, confidence)
    return CouplingCertificate(
        delta=float(delta),
        p_close_hat=float(ind.mean()),
        p_close_slack=slack,
        tv_bound=_check_unit(tv_bound, "tv_bound"),
        confidence=float(confidence),
    )
