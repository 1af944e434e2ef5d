"""Exact small-system spin-glass computations and the disorder scaling coupling.

The Hamiltonian is the pairwise mean-field form n^(-1/2) sum_{i<j} g_ij s_i s_j
with no external field.  All thermodynamic quantities come from exact
enumeration of the 2^n spin configurations, done with a Gray-code sweep that
updates the energy in O(n) work per configuration.  Dividing every coupling by
(1 - alpha/n) scales all energies, the free energy gap obeys a Jensen lower
bound, and the ground state scales exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ShapeError, SizeError

MAX_SPINS = 20
#: recompute the running energy and local fields every this many flips to
#: stop floating-point drift from accumulating across the sweep
_REFRESH_INTERVAL = 256


@dataclass(frozen=True)
class SKDisorder:
    """Symmetric pair couplings, stored as the flat upper triangle (i < j)."""

    n: int
    couplings: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.couplings, dtype=float)
        expected = self.n * (self.n - 1) // 2
        if g.ndim != 1 or g.size != expected:
            raise ShapeError(
                f"need {expected} couplings for n = {self.n}, got shape {g.shape}"
            )
        if not np.all(np.isfinite(g)):
            raise DomainError("couplings must be finite")
        object.__setattr__(self, "couplings", g)

    def coupling_matrix(self):
        """Dense symmetric matrix with zero diagonal."""
        mat = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, k=1)
        mat[iu] = self.couplings
        return mat + mat.T

    def to_csv(self, path):
        np.savetxt(path, self.couplings, delimiter=",")

    @classmethod
    def from_csv(cls, path, n):
        return cls(n, np.atleast_1d(np.loadtxt(path, delimiter=",")))


@dataclass(frozen=True)
class SKResult:
    """Free energy, Gibbs-average energy, and ground state at one temperature."""

    beta: float
    free_energy: float
    gibbs_energy: float
    ground_state: float


def hamiltonian(dis, spins):
    """Energy n^(-1/2) sum_{i<j} g_ij s_i s_j of one configuration."""
    spins = np.asarray(spins, dtype=float)
    if spins.shape != (dis.n,):
        raise ShapeError(f"spin vector must have length {dis.n}")
    if not np.all(np.abs(spins) == 1.0):
        raise DomainError("spins must be +/-1")
    mat = dis.coupling_matrix()
    return 0.5 * float(spins @ mat @ spins) / math.sqrt(dis.n)


def enumerate_energies(dis):
    """Energies of all 2^n configurations via a Gray-code single-flip sweep.

    Entry ``E[b]`` is the energy of the configuration whose spin j is -1
    exactly when bit j of b is set.  Each Gray-code step flips one spin and
    updates the energy from the local field in O(n).
    """
    n = dis.n
    if n < 2:
        raise SizeError(f"need at least 2 spins, got {n}")
    if n > MAX_SPINS:
        raise SizeError(f"exact enumeration capped at {MAX_SPINS} spins, got {n}")
    mat = dis.coupling_matrix()
    rows = [np.ascontiguousarray(mat[k]) for k in range(n)]
    sigma = np.ones(n)
    fields = mat @ sigma
    energy = 0.5 * float(sigma @ fields)
    energies = np.empty(1 << n)
    energies[0] = energy
    code = 0
    for step in range(1, 1 << n):
        k = (step & -step).bit_length() - 1
        s_old = sigma[k]
        energy -= 2.0 * s_old * fields[k]
        sigma[k] = -s_old
        fields -= (2.0 * s_old) * rows[k]
        code ^= 1 << k
        if step % _REFRESH_INTERVAL == 0:
            fields = mat @ sigma
            energy = 0.5 * float(sigma @ fields)
        energies[code] = energy
    return energies / math.sqrt(n)


def result_from_energies(energies, beta):
    """Thermodynamics from a precomputed energy table."""
    beta = float(beta)
    if beta < 0.0:
        raise DomainError(f"inverse temperature must be nonnegative, got {beta}")
    free = float(logsumexp(beta * energies))
    shifted = beta * energies - np.max(beta * energies)
    weights = np.exp(shifted)
    weights /= weights.sum()
    gibbs = float(weights @ energies)
    return SKResult(
        beta=beta,
        free_energy=free,
        gibbs_energy=gibbs,
        ground_state=float(energies.max()),
    )


def free_energy(dis, beta):
    """Exact log partition sum over all configurations, with Gibbs average
    energy and ground state from the same sweep."""
    return result_from_energies(enumerate_energies(dis), beta)


def disorder_scale_eps(n, alpha):
    """Scaling eps with 1 + eps = 1/(1 - alpha/n), as seen by each coupling."""
    shrink = 1.0 - float(alpha) / n
    if not 0.5 < shrink < 1.5:
        raise DomainError(f"alpha/n = {float(alpha) / n} must lie in (-1/2, 1/2)")
    return 1.0 / shrink - 1.0


def scale_disorder(dis, alpha):
    """Divide every coupling by (1 - alpha/n)."""
    factor = 1.0 - float(alpha) / dis.n
    disorder_scale_eps(dis.n, alpha)  # validates the range
    return SKDisorder(dis.n, dis.couplings / factor)


def jensen_gap_check(dis, alpha, beta, energies=None, scaled_energies=None):
    """Free-energy gap against its Jensen lower bound.

    Returns (lhs, rhs, holds) where lhs is the scaled-minus-base free energy
    difference and rhs = beta * alpha * <H>_beta / (n (1 - alpha/n)).
    Precomputed energy tables may be passed to amortize sweeps.
    """
    if energies is None:
        energies = enumerate_energies(dis)
    if scaled_energies is None:
        scaled_energies = enumerate_energies(scale_disorder(dis, alpha))
    base = result_from_energies(energies, beta)
    scaled = result_from_energies(scaled_energies, beta)
    lhs = scaled.free_energy - base.free_energy
    rhs = (
        float(beta)
        * float(alpha)
        * base.gibbs_energy
        / (dis.n * (1.0 - float(alpha) / dis.n))
    )
    return lhs, rhs, bool(lhs >= rhs - 1e-10)


def derivative_check(dis, beta, step=1e-4, energies=None):
    """Finite-difference derivative of the free energy against <H>_beta."""
    beta = float(beta)
    if beta <= 0.0:
        raise DomainError("derivative check needs beta > 0")
    if energies is None:
        energies = enumerate_energies(dis)
    up = float(logsumexp((beta + step) * energies))
    down = float(logsumexp((beta - step) * energies))
    fd = (up - down) / (2.0 * step)
    gibbs = result_from_energies(energies, beta).gibbs_energy
    agree = abs(fd - gibbs) <= 1e-5 * max(1.0, abs(gibbs))
    return fd, gibbs, bool(agree)
