"""Euclidean combinatorial functionals and their two couplings.

The functionals (closed TSP tour, perfect matching, nearest-neighbor sum) are
all homogeneous of degree 1: scaling every point by lambda scales the value by
lambda exactly.  That identity powers the global scaling coupling.  The second
coupling resamples half the points of a uniform-square instance inside a small
neighborhood of the other half, with an exact mixture affinity per resampled
point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .coupling import PerturbationPlan, product_tv_bound
from .densities import scaled_affinity
from .errors import (
    DegenerateRegionError,
    DomainError,
    InternalConsistencyError,
    ShapeError,
    SizeError,
)
from .rng import uniform_open

TSP_EXACT_MAX = 15
MATCHING_MAX = 16

FUNCTIONAL_KINDS = ("tsp-exact", "tsp-2opt", "matching-exact", "nn-sum")


@dataclass(frozen=True)
class PointSet:
    """A finite set of points in R^d, one row per point."""

    dim: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ShapeError(f"points must be (n, {self.dim}), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("all coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    def scaled(self, factor):
        return PointSet(self.dim, self.points * float(factor))

    def to_csv(self, path):
        np.savetxt(path, self.points, delimiter=",")

    @classmethod
    def from_csv(cls, path, dim=None):
        pts = np.atleast_2d(np.loadtxt(path, delimiter=","))
        return cls(dim if dim is not None else pts.shape[1], pts)


@dataclass(frozen=True)
class FunctionalValue:
    """Value of a geometric functional with its optimality witness."""

    kind: str
    value: float
    witness: object  # tour order, matching pairs, or None

    def __post_init__(self):
        if self.kind not in FUNCTIONAL_KINDS:
            raise DomainError(f"unknown functional kind {self.kind!r}")
        if self.value < 0.0:
            raise DomainError("functional values are nonnegative")


def distance_matrix(ps):
    diff = ps.points[:, None, :] - ps.points[None, :, :]
    return np.sqrt(np.square(diff).sum(axis=2))


def tour_length(ps, order):
    """Length of the closed tour visiting points in the given order."""
    pts = ps.points[np.asarray(order, dtype=int)]
    seg = pts - np.roll(pts, -1, axis=0)
    return float(np.sqrt(np.square(seg).sum(axis=1)).sum())


def matching_length(ps, pairs):
    total = 0.0
    for i, j in pairs:
        total += float(np.linalg.norm(ps.points[i] - ps.points[j]))
    return total


def tsp_exact(ps):
    """Optimal closed tour by the Held-Karp subset dynamic program."""
    n = ps.n
    if n < 3 or n > TSP_EXACT_MAX:
        raise SizeError(
            f"tsp_exact supports 3 <= n <= {TSP_EXACT_MAX} (got {n}); "
            "use tsp_2opt for larger instances"
        )
    dist = distance_matrix(ps)
    m = n - 1  # nodes 1..n-1, anchored at node 0
    sub = dist[1:, 1:]
    first_leg = dist[0, 1:]
    full = 1 << m
    dp = np.full((full, m), np.inf)
    parent = np.full((full, m), -1, dtype=np.int16)
    for j in range(m):
        dp[1 << j, j] = first_leg[j]
    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue  # singletons were seeded above
        bits = mask
        while bits:
            low = bits & -bits
            j = low.bit_length() - 1
            bits ^= low
            prev = mask ^ (1 << j)
            cand = dp[prev] + sub[:, j]
            k = int(np.argmin(cand))
            dp[mask, j] = cand[k]
            parent[mask, j] = k
    closing = dp[full - 1] + first_leg
    last = int(np.argmin(closing))
    order = [last + 1]
    mask = full - 1
    j = last
    while parent[mask, j] >= 0:
        k = int(parent[mask, j])
        mask ^= 1 << j
        order.append(k + 1)
        j = k
    order.append(0)
    order.reverse()
    return FunctionalValue("tsp-exact", tour_length(ps, order), tuple(order))


def _two_opt_pass(order, dist):
    """Single best-improvement 2-opt pass; returns True if a move was made."""
    n = len(order)
    best_gain = 0.0
    best_move = None
    for i in range(n - 1):
        a, b = order[i], order[i + 1]
        # reversing order[i+1 .. j] replaces edges (a,b) and (c,d) by (a,c), (b,d)
        j = np.arange(i + 2, n)
        c = order[j]
        d = order[(j + 1) % n]
        gains = dist[a, c] + dist[b, d] - dist[a, b] - dist[c, d]
        if i == 0:
            gains = gains[:-1]  # (i, j) = (0, n-1) reverses the whole tour
            j = j[:-1]
        if gains.size == 0:
            continue
        k = int(np.argmin(gains))
        if gains[k] < best_gain:
            best_gain = float(gains[k])
            best_move = (i + 1, int(j[k]))
    if best_move is None:
        return False
    lo, hi = best_move
    order[lo : hi + 1] = order[lo : hi + 1][::-1]
    return True


def tsp_2opt(ps, rng, restarts=20):
    """2-opt local search over random restarts.

    All comparisons are scale-invariant, so scaling the points by an exactly
    representable factor scales the returned value exactly.
    """
    n = ps.n
    if n < 4:
        raise SizeError(f"tsp_2opt needs n >= 4, got {n}")
    restarts = int(restarts)
    if restarts < 1:
        raise DomainError("need at least one restart")
    dist = distance_matrix(ps)
    best_value = math.inf
    best_order = None
    max_passes = 200 * n  # safety cap; each accepted move shortens the tour
    for _ in range(restarts):
        order = rng.permutation(n)
        for _ in range(max_passes):
            if not _two_opt_pass(order, dist):
                break
        value = tour_length(ps, order)
        if value < best_value:
            best_value = value
            best_order = order.copy()
    return FunctionalValue("tsp-2opt", best_value, tuple(int(v) for v in best_order))


def matching_exact(ps):
    """Minimum-weight perfect matching by bitmask dynamic programming."""
    n = ps.n
    if n % 2 != 0 or n < 2 or n > MATCHING_MAX:
        raise SizeError(
            f"matching_exact supports even 2 <= n <= {MATCHING_MAX}, got {n}"
        )
    dist = distance_matrix(ps).tolist()
    full = 1 << n
    dp = [math.inf] * full
    choice = [0] * full
    dp[0] = 0.0
    for mask in range(full):
        base = dp[mask]
        if base == math.inf:
            continue
        free = ~mask & (full - 1)
        if free == 0:
            continue
        low = free & -free
        i = low.bit_length() - 1
        row = dist[i]
        rest = free ^ low
        while rest:
            jbit = rest & -rest
            j = jbit.bit_length() - 1
            rest ^= jbit
            new = mask | low | jbit
            cost = base + row[j]
            if cost < dp[new]:
                dp[new] = cost
                choice[new] = low | jbit
    pairs = []
    mask = full - 1
    while mask:
        pair = choice[mask]
        i = (pair & -pair).bit_length() - 1
        j = (pair ^ (pair & -pair)).bit_length() - 1
        pairs.append((i, j))
        mask ^= pair
    pairs.reverse()
    return FunctionalValue(
        "matching-exact", matching_length(ps, pairs), tuple(pairs)
    )


def nn_sum(ps):
    """Sum over points of the distance to the nearest other point."""
    if ps.n < 2:
        raise SizeError(f"nn_sum needs n >= 2, got {ps.n}")
    dist = distance_matrix(ps)
    np.fill_diagonal(dist, np.inf)
    return FunctionalValue("nn-sum", float(dist.min(axis=1).sum()), None)


def evaluate_functional(ps, kind, rng_factory=None, restarts=20):
    """Dispatch a functional evaluation by kind.

    ``rng_factory`` must return a fresh identically seeded generator on every
    call; tsp-2opt needs that so repeated evaluations (for homogeneity checks)
    follow identical search paths.
    """
    if kind == "tsp-exact":
        return tsp_exact(ps)
    if kind == "matching-exact":
        return matching_exact(ps)
    if kind == "nn-sum":
        return nn_sum(ps)
    if kind == "tsp-2opt":
        if rng_factory is None:
            raise DomainError("tsp-2opt requires an rng_factory")
        return tsp_2opt(ps, rng_factory(), restarts=restarts)
    raise DomainError(f"unknown functional kind {kind!r}")


def scaling_coupling(ps, alpha, r, kind, density, rng_factory=None):
    """Global scaling coupling: every coordinate shrinks by 1/(1 + eps).

    Returns (base value, scaled value, tv_bound).  The scaled value is
    computed both from the homogeneity identity value / (1+eps)^r and by
    re-evaluating the functional on the scaled points; disagreement beyond
    1e-9 relative means the functional is not homogeneous of degree r.
    """
    n = ps.n
    eps = float(alpha) / math.sqrt(n)
    if not 0.0 <= eps < 0.5:
        raise DomainError(f"alpha n^-1/2 = {eps} must lie in [0, 1/2)")
    base = evaluate_functional(ps, kind, rng_factory=rng_factory)
    identity_value = base.value / (1.0 + eps) ** r
    rescaled = evaluate_functional(
        ps.scaled(1.0 / (1.0 + eps)), kind, rng_factory=rng_factory
    )
    tol = 1e-9 * max(1.0, abs(identity_value))
    if abs(rescaled.value - identity_value) > tol:
        raise InternalConsistencyError(
            f"{kind} is not homogeneous of degree {r}: identity gives "
            f"{identity_value!r}, re-evaluation gives {rescaled.value!r}"
        )
    coords = n * ps.dim
    rho = scaled_affinity(density, eps).rho
    plan = PerturbationPlan(
        "scale", np.full(coords, eps), np.full(coords, rho)
    )
    return base, rescaled, product_tv_bound(plan)


@dataclass(frozen=True)
class RheeCoupling:
    """Bookkeeping for one draw of the resampling coupling.

    ``resample_indices`` lists the points (0-based, all at least m) whose
    perturbed copy came from the neighborhood region D; the affinity is exact
    given the region volume, which is itself a Monte-Carlo estimate with the
    reported standard error.
    """

    m: int
    ball_radius: float
    resample_indices: tuple
    vol_D_estimate: float
    vol_D_sigma: float
    probes: int
    exact_affinity_per_coordinate: float

    def __post_init__(self):
        if not 0.0 < self.vol_D_estimate <= 1.0:
            raise DomainError("region volume estimate must lie in (0, 1]")
        if not 0.0 <= self.exact_affinity_per_coordinate <= 1.0:
            raise DomainError("affinity must lie in [0, 1]")
        if any(i < self.m for i in self.resample_indices):
            raise DomainError("only indices >= m may be resampled")


def rhee_mixture_affinity(vol, theta):
    """Affinity between the D-mixture density and the uniform law.

    The resampled point has density (1 - theta) + theta/vol on D and
    (1 - theta) outside, so the affinity against the uniform density is
    (1 - vol) sqrt(1 - theta) + vol sqrt(1 - theta + theta/vol), an exact
    finite formula requiring no quadrature.
    """
    vol = float(vol)
    theta = float(theta)
    if not 0.0 < vol <= 1.0:
        raise DomainError(f"volume must lie in (0, 1], got {vol}")
    if not 0.0 <= theta < 1.0:
        raise DomainError(f"mixing rate must lie in [0, 1), got {theta}")
    rho = (1.0 - vol) * math.sqrt(1.0 - theta) + vol * math.sqrt(
        1.0 - theta + theta / vol
    )
    return min(rho, 1.0)


def rhee_coupling_sample(
    n, alpha, beta, rng, probes=100000, max_rejection=10**6
):
    """One draw of the resampling coupling on the unit square (d = 2).

    The first m = n//2 points are shared.  D is the set of square points
    within alpha * n^(-1/2) of those m points; each later point is replaced,
    with probability beta * n^(-1/2), by a uniform draw from D obtained by
    rejection sampling.
    """
    n = int(n)
    if n < 8:
        raise DomainError(f"need n >= 8, got {n}")
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    theta = float(beta) / math.sqrt(n)
    if not 0.0 <= theta < 1.0:
        raise DomainError(f"beta n^-1/2 = {theta} must lie in [0, 1)")
    m = n // 2
    radius = alpha * n ** (-1.0 / 2.0)  # alpha * n^(-1/d) with d = 2

    x = uniform_open(rng, (n, 2))
    tree = cKDTree(x[:m])

    probe_pts = uniform_open(rng, (int(probes), 2))
    hit = tree.query(probe_pts, k=1)[0] <= radius
    vol_hat = float(hit.mean())
    vol_sigma = math.sqrt(max(vol_hat * (1.0 - vol_hat), 1e-12) / probes)
    if vol_hat <= 0.0:
        raise DegenerateRegionError(
            "no Monte-Carlo probe landed in the resampling region"
        )

    resampled = []
    x_prime = x.copy()
    batch = 256
    for i in range(m, n):
        if uniform_open(rng) >= theta:
            continue
        attempts = 0
        y = None
        while y is None:
            cand = uniform_open(rng, (batch, 2))
            ok = tree.query(cand, k=1)[0] <= radius
            attempts += batch
            if ok.any():
                y = cand[int(np.argmax(ok))]
            elif attempts >= max_rejection:
                raise DegenerateRegionError(
                    f"rejection sampling exceeded {max_rejection} attempts; "
                    f"region volume estimate {vol_hat:g}"
                )
        x_prime[i] = y
        resampled.append(i)

    coupling = RheeCoupling(
        m=m,
        ball_radius=radius,
        resample_indices=tuple(resampled),
        vol_D_estimate=vol_hat,
        vol_D_sigma=vol_sigma,
        probes=int(probes),
        exact_affinity_per_coordinate=rhee_mixture_affinity(vol_hat, theta),
    )
    return PointSet(2, x), PointSet(2, x_prime), coupling


def rhee_conservative_affinity(coupling, theta, sigmas=3.0):
    """Affinity at the volume estimate lowered by ``sigmas`` standard errors.

    The mixture affinity increases with the region volume, so evaluating it at
    the lowered volume folds the Monte-Carlo error of the volume estimate into
    the certificate conservatively.
    """
    vol = max(coupling.vol_D_estimate - sigmas * coupling.vol_D_sigma, 1e-9)
    return rhee_mixture_affinity(vol, theta)


def rhee_gap_statistics(ps, ps_prime, kind, rng_factory=None):
    """Functional gap L - L' between the coupled point sets."""
    base = evaluate_functional(ps, kind, rng_factory=rng_factory)
    prime = evaluate_functional(ps_prime, kind, rng_factory=rng_factory)
    return base.value - prime.value


def move_surgery_bound(ps, ps_prime, moved_indices, max_edge=0.0):
    """Upper bound on |L - L'| from moving the listed points one at a time.

    Replacing one point p by p' in an optimal tour changes the optimum by at
    most 2 ||p - p'|| (swap p for p' in place and use the triangle inequality
    on its two incident edges); summing over moved points and padding each
    term with the longest tour edge gives a deliberately loose sanity bound.
    """
    total = 0.0
    for i in moved_indices:
        total += 2.0 * (
            float(np.linalg.norm(ps.points[i] - ps_prime.points[i])) + max_edge
        )
    return total
