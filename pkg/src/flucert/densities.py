"""Smooth one-dimensional densities exp(-potential) and their Hellinger affinities.

The densities handled here live on the full line or the half line, have a
smooth potential (negative log-density) with evaluable first and second
derivatives, and tails that decay faster than any polynomial.  That decay is
what justifies truncating every integral to a fixed finite window before
handing it to the adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtri

from .errors import ConfigError, DomainError, NumericError
from .rng import uniform_open

FULL_LINE = "full-line"
HALF_LINE = "half-line"

#: quadrature error above this raises NumericError
QUAD_TOL = 1e-8
_QUAD_EPS = 1e-12
_TAIL = 40.0

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Density1D:
    """A probability density exp(-potential) on the line or half line.

    ``potential_d1`` and ``potential_d2`` are the first and second
    derivatives of the potential; ``ppf`` is the inverse CDF backing the
    deterministic sampler.  ``domain_scale`` widens the quadrature window
    for half-line densities with a longer natural length scale.
    """

    name: str
    support: str
    potential: Callable
    potential_d1: Callable
    potential_d2: Callable
    ppf: Callable
    domain_scale: float = 1.0

    def __post_init__(self):
        if self.support not in (FULL_LINE, HALF_LINE):
            raise ConfigError(f"unknown support type {self.support!r}")

    def quad_range(self):
        if self.support == FULL_LINE:
            return (-_TAIL, _TAIL)
        return (0.0, _TAIL + self.domain_scale)

    def pdf(self, x):
        return np.exp(-self.potential(np.asarray(x, dtype=float)))

    def sample(self, rng, size=None):
        """Draw from the density; draw i depends only on the stream key and i."""
        return self.ppf(uniform_open(rng, size))


@dataclass(frozen=True)
class AffinityResult:
    """Hellinger affinity value with the error estimate of its evaluation."""

    rho: float
    quadrature_error_estimate: float
    method: str  # "closed-form" or "adaptive-quadrature"

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"affinity {self.rho} outside [0, 1]")
        if self.quadrature_error_estimate < 0.0:
            raise DomainError("error estimate must be nonnegative")
        if self.method == "closed-form" and self.quadrature_error_estimate != 0.0:
            raise DomainError("closed-form affinities carry no quadrature error")


def _std_gaussian():
    return Density1D(
        name="std-gaussian",
        support=FULL_LINE,
        potential=lambda x: 0.5 * np.square(x) + _HALF_LOG_2PI,
        potential_d1=lambda x: np.asarray(x, dtype=float),
        potential_d2=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        ppf=ndtri,
    )


def _exponential_rate_1():
    return Density1D(
        name="exponential-rate-1",
        support=HALF_LINE,
        potential=lambda x: np.asarray(x, dtype=float),
        potential_d1=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        potential_d2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        ppf=lambda u: -np.log1p(-np.asarray(u, dtype=float)),
    )


_HALF_GAUSS_CONST = 0.5 * math.log(math.pi / 2.0)


def _half_gaussian():
    # density sqrt(2/pi) * exp(-x^2/2) on [0, inf)
    return Density1D(
        name="half-gaussian",
        support=HALF_LINE,
        potential=lambda x: 0.5 * np.square(x) + _HALF_GAUSS_CONST,
        potential_d1=lambda x: np.asarray(x, dtype=float),
        potential_d2=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        ppf=lambda u: ndtri(0.5 * (1.0 + np.asarray(u, dtype=float))),
    )


_BUILDERS = {
    "std-gaussian": _std_gaussian,
    "exponential-rate-1": _exponential_rate_1,
    "half-gaussian": _half_gaussian,
}

STANDARD_DENSITY_NAMES = tuple(sorted(_BUILDERS))


@lru_cache(maxsize=None)
def standard_density(name):
    """Return one of the built-in densities by name."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown density {name!r}; available: {', '.join(STANDARD_DENSITY_NAMES)}"
        ) from None
    return builder()


def sample_iid(f, n, rng):
    """n independent draws from f, deterministic given the seed stream."""
    n = int(n)
    if n < 1:
        raise DomainError(f"need n >= 1 draws, got {n}")
    return f.sample(rng, n)


def _quad_or_raise(integrand, lo, hi, what, points=None):
    value, err = quad(
        integrand, lo, hi, epsabs=_QUAD_EPS, epsrel=_QUAD_EPS, limit=200, points=points
    )
    if err > QUAD_TOL:
        raise NumericError(
            f"quadrature for {what} did not converge below {QUAD_TOL:g} "
            f"(error estimate {err:g})",
            partial=value,
        )
    return value, err


def normalization(f):
    """Integral of the density over its support (should be 1)."""
    lo, hi = f.quad_range()
    return _quad_or_raise(lambda x: math.exp(-float(f.potential(x))), lo, hi, f.name)


def hellinger_affinity(f, g):
    """Hellinger affinity: the integral of sqrt(f * g) over the shared support."""
    if f.support != g.support:
        raise DomainError(
            f"affinity needs matching supports, got {f.support} vs {g.support}"
        )
    lo_f, hi_f = f.quad_range()
    lo_g, hi_g = g.quad_range()
    lo, hi = min(lo_f, lo_g), max(hi_f, hi_g)

    def integrand(x):
        return math.exp(-0.5 * (float(f.potential(x)) + float(g.potential(x))))

    value, err = _quad_or_raise(integrand, lo, hi, f"affinity({f.name}, {g.name})")
    return AffinityResult(min(value, 1.0), err, "adaptive-quadrature")


@lru_cache(maxsize=None)
def scaled_affinity(f, eps):
    """Affinity between f and the law of X/(1+eps) for X ~ f.

    The perturbed density is (1+eps) * exp(-potential((1+eps) x)).  The result
    is 1 - O(eps^2) for every density in scope here.
    """
    eps = float(eps)
    if not -0.5 < eps < 0.5:
        raise DomainError(f"scaling eps must lie in (-1/2, 1/2), got {eps}")
    if eps == 0.0:
        return AffinityResult(1.0, 0.0, "closed-form")
    lo, hi = f.quad_range()
    scale = math.sqrt(1.0 + eps)

    def integrand(x):
        return scale * math.exp(
            -0.5 * (float(f.potential((1.0 + eps) * x)) + float(f.potential(x)))
        )

    value, err = _quad_or_raise(integrand, lo, hi, f"scaled affinity({f.name}, {eps})")
    return AffinityResult(min(value, 1.0), err, "adaptive-quadrature")


def gaussian_scale_affinity(sigma1, sigma2):
    """Closed form for centered Gaussians: sqrt(2 s1 s2 / (s1^2 + s2^2))."""
    if sigma1 <= 0.0 or sigma2 <= 0.0:
        raise DomainError("standard deviations must be positive")
    rho = math.sqrt(2.0 * sigma1 * sigma2 / (sigma1**2 + sigma2**2))
    return AffinityResult(min(rho, 1.0), 0.0, "closed-form")


def exponential_rate_affinity(rate1, rate2):
    """Closed form for exponentials: 2 sqrt(r1 r2) / (r1 + r2)."""
    if rate1 <= 0.0 or rate2 <= 0.0:
        raise DomainError("rates must be positive")
    rho = 2.0 * math.sqrt(rate1 * rate2) / (rate1 + rate2)
    return AffinityResult(min(rho, 1.0), 0.0, "closed-form")
