"""Covering-radius estimation and the entropy-sum bound arithmetic.

Function classes are represented by finite samples on a shared dense grid
with the uniform (max-abs) metric.  The resulting profile is a lower
estimate of the underlying class entropy and a greedy upper-type estimate
for the sampled set itself; both caveats are recorded in the profile
metadata.

The index convention follows the covering-number ladder: ``eps_n`` allows
``2^n`` centers, and the doubly exponential sequence ``e_k`` is read off as
``e_0 = eps_0`` and ``e_k = eps_{2^k}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary
from .errors import ProfileTooShortError
from .points import PointSet

BISECTION_TOL = 1e-4
BISECTION_MAX_ITERS = 40


class SampledClass:
    """Finite sample of a function class on a shared evaluation grid."""

    def __init__(self, values, grid=None, metadata=None):
        values = np.asarray(values)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError("expected a (representatives, grid) value matrix")
        self.values = values.astype(complex)
        self.grid = grid
        self.metadata = dict(metadata or {})
        self._radii = None
        self._dist32 = None

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def grid_size(self) -> int:
        return self.values.shape[1]

    def distances_from(self, i: int) -> np.ndarray:
        """Uniform-metric distances from representative i to all others."""
        return np.abs(self.values - self.values[i]).max(axis=1)

    def distance(self, i: int, j: int) -> float:
        return float(np.abs(self.values[i] - self.values[j]).max())

    @classmethod
    def from_l1_ball(cls, dictionary: Dictionary, n_representatives: int = 4096,
                     grid_level: int = 10, seed: int = 0,
                     sparse_supports: bool = True) -> "SampledClass":
        """Sample expansions with coefficient l1 mass at most 1.

        The zero expansion is always the first representative (it belongs
        to the ball and anchors single-center covers).  Every other
        representative draws a random support (all of it when
        ``sparse_supports`` is false), Dirichlet weights on the support and
        uniform phases, so its coefficient moduli sum to one; the sample
        emphasizes the extreme shell that drives the covering structure.
        """
        n = dictionary.size
        grid = PointSet.equispaced(2 ** grid_level, dictionary.dimension)
        basis = dictionary.values_at(grid)
        rng = np.random.default_rng([int(seed), 0])
        coeff = np.zeros((n, n_representatives), dtype=complex)
        for j in range(1, n_representatives):
            size = int(rng.integers(1, n + 1)) if sparse_supports else n
            support = np.sort(rng.choice(n, size=size, replace=False))
            weights = rng.dirichlet(np.ones(size))
            phases = np.exp(2j * np.pi * rng.random(size))
            coeff[support, j] = weights * phases
        values = (basis @ coeff).T
        meta = {
            "source": "l1_coefficient_ball",
            "dictionary_size": n,
            "n_representatives": int(n_representatives),
            "grid_points": int(grid.size),
            "seed": int(seed),
            "sparse_supports": bool(sparse_supports),
            "caveats": [
                "lower estimate of the underlying class entropy (finite sample)",
                "greedy covering gives an upper-type estimate for the sampled set",
            ],
        }
        return cls(values, grid, meta)


def greedy_cover(sampled: SampledClass, eps: float) -> list:
    """Greedy farthest-point cover of the sample at radius ``eps``.

    Each new center is an uncovered representative at maximal distance from
    the chosen centers, ties resolved to the lowest index; centers are
    representatives themselves.
    """
    if eps <= 0:
        raise ValueError("covering radius must be positive")
    n = sampled.count
    dmin = np.full(n, np.inf)
    centers = []
    while True:
        if centers and dmin.max() <= eps:
            break
        c = int(np.argmax(dmin))  # all-inf on the first pass picks index 0
        centers.append(c)
        np.minimum(dmin, sampled.distances_from(c), out=dmin)
        if len(centers) == n:
            break
    return centers


def farthest_point_radii(sampled: SampledClass, t_max: int) -> np.ndarray:
    """Covering radius after t greedy centers, for t = 1..t_max.

    The greedy selection order does not depend on any target radius, so
    this single traversal answers every cover-size query; results are
    cached on the sample.  Distances run in single precision on squared
    moduli (error near 1e-7, far below the bisection tolerance).
    """
    t_max = min(int(t_max), sampled.count)
    if sampled._radii is not None and len(sampled._radii) >= t_max:
        return sampled._radii[:t_max]
    if sampled._dist32 is None:
        v32 = sampled.values.astype(np.complex64)
        sampled._dist32 = (np.ascontiguousarray(v32.real),
                           np.ascontiguousarray(v32.imag))
    re, im = sampled._dist32
    n = sampled.count
    dmin2 = np.full(n, np.inf, dtype=np.float32)
    radii2 = np.empty(t_max, dtype=np.float32)
    buf_a = np.empty_like(re)
    buf_b = np.empty_like(re)
    for t in range(t_max):
        c = int(np.argmax(dmin2))
        np.subtract(re, re[c], out=buf_a)
        np.multiply(buf_a, buf_a, out=buf_a)
        np.subtract(im, im[c], out=buf_b)
        np.multiply(buf_b, buf_b, out=buf_b)
        buf_a += buf_b
        np.minimum(dmin2, buf_a.max(axis=1), out=dmin2)
        radii2[t] = dmin2.max()
    radii = np.sqrt(radii2.astype(float))
    sampled._radii = radii
    return radii


@dataclass
class EntropyProfile:
    """Estimates eps_n for n = 0..n_max plus the dyadic e_k readout."""

    eps: np.ndarray
    zero_from: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        if self.eps.ndim != 1 or self.eps.size < 1:
            raise ValueError("expected a 1-d eps sequence")
        if np.any(np.diff(self.eps) > 1e-12):
            raise ValueError("eps must be nonincreasing in n")

    @property
    def n_max(self) -> int:
        return self.eps.size - 1

    def eps_at(self, n: int) -> float:
        if n <= self.n_max:
            return float(self.eps[n])
        if self.zero_from is not None and n >= self.zero_from:
            return 0.0
        raise ProfileTooShortError(
            f"profile covers n <= {self.n_max} but n = {n} was requested")

    def e_sequence(self) -> list:
        """``e_0 = eps_0`` and ``e_k = eps_{2^k}`` while indices fit."""
        out = [float(self.eps[0])]
        k = 1
        while 2 ** k <= self.n_max:
            out.append(float(self.eps[2 ** k]))
            k += 1
        return out

    def e_at(self, k: int) -> float:
        return self.eps_at(0) if k == 0 else self.eps_at(2 ** k)

    def to_csv_rows(self):
        return [(n, float(v)) for n, v in enumerate(self.eps)]

    def to_json(self):
        return {
            "eps": [float(v) for v in self.eps],
            "e_k": self.e_sequence(),
            "zero_from": self.zero_from,
            "metadata": self.metadata,
        }

    @classmethod
    def from_values(cls, eps, zero_from=None, metadata=None):
        return cls(np.asarray(eps, dtype=float), zero_from, dict(metadata or {}))


def _eps_for_budget(sampled, budget, bisect_tol, max_bisect):
    """Bisect the radius until the greedy cover size is at most ``budget``."""
    if budget >= sampled.count:
        return 0.0
    radii = farthest_point_radii(sampled, budget)
    target = radii[budget - 1]
    if target <= 0.0:
        return 0.0
    lo, hi = 0.0, float(radii[0])
    for _ in range(max_bisect):
        if hi - lo <= bisect_tol:
            break
        mid = 0.5 * (lo + hi)
        if target <= mid:  # greedy cover at radius mid needs <= budget centers
            hi = mid
        else:
            lo = mid
    return hi


def entropy_numbers(sampled: SampledClass, n_max: int,
                    bisect_tol: float = BISECTION_TOL,
                    max_bisect: int = BISECTION_MAX_ITERS) -> EntropyProfile:
    """Estimate eps_n for n = 0..n_max by bisection over greedy cover sizes.

    For each n the radius is bisected until the greedy cover needs at most
    ``2^n`` centers; the cover-size queries are answered from one cached
    farthest-point traversal, which is exactly the greedy cover run at
    every radius simultaneously.  Budgets of at least the sample size give
    radius zero outright.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    n_reps = sampled.count
    finite = [2 ** k for k in range(n_max + 1) if 2 ** k < n_reps]
    if finite:
        farthest_point_radii(sampled, max(finite))  # one traversal, cached
    eps = np.array([_eps_for_budget(sampled, 2 ** n, bisect_tol, max_bisect)
                    for n in range(n_max + 1)])
    eps = np.minimum.accumulate(eps)
    zero_from = math.ceil(math.log2(n_reps)) if n_reps > 1 else 0
    meta = dict(sampled.metadata)
    meta.update({"estimator": "greedy-cover bisection",
                 "bisect_tol": bisect_tol, "n_max": int(n_max)})
    return EntropyProfile(eps, zero_from, meta)


def entropy_sum_flat(profile: EntropyProfile, theta: float, m: int) -> float:
    """``sum_{n=0}^{m} (n+1)^{-1/2} eps_n^theta``."""
    total = 0.0
    for n in range(m + 1):
        total += (n + 1) ** (-0.5) * profile.eps_at(n) ** theta
    return total


def entropy_sum_dyadic(profile: EntropyProfile, theta: float, m: int) -> float:
    """``sum_{k=0}^{floor(log2 m)} 2^{k/2} e_k^theta``."""
    total = 0.0
    for k in range(int(math.floor(math.log2(m))) + 1):
        total += 2.0 ** (k / 2.0) * profile.e_at(k) ** theta
    return total


def _chaining_prefactor(p: float, bound_m: float, m: int) -> float:
    return p ** 2 * bound_m ** max(p / 2.0, p - 1.0) * m ** (-0.5)


def chaining_bound(profile: EntropyProfile, p: float, sup_bound: float,
                   m: int) -> float:
    """Entropy-sum functional behind the discretization-error bound.

    Evaluates ``p^2 M^{max(p/2, p-1)} m^{-1/2} sum_{n<=m} (n+1)^{-1/2}
    eps_n^{theta}`` with ``theta = min(2, p)/2`` and the absolute constant
    set to 1, so the value is meaningful up to that unknown constant.
    """
    theta = min(2.0, p) / 2.0
    return _chaining_prefactor(p, sup_bound, m) * entropy_sum_flat(profile, theta, m)


def chaining_bound_dyadic(profile: EntropyProfile, p: float, sup_bound: float,
                          m: int) -> float:
    """Dyadic form of the same functional, using the e_k ladder."""
    theta = min(2.0, p) / 2.0
    return _chaining_prefactor(p, sup_bound, m) * entropy_sum_dyadic(profile, theta, m)


def finite_dim_decay_check(sampled: SampledClass, dim: int, k0: int, k: int,
                           profile: EntropyProfile | None = None) -> bool:
    """Check ``e_k <= 3 * 2^(2^k0/dim) * e_k0 * 2^(-2^k/dim)`` on estimates.

    The left side is an upper-type estimate, so a failure flags an
    estimator bug rather than a mathematical violation.
    """
    if k <= k0:
        raise ValueError("need k > k0")
    if profile is not None:
        lhs, base = profile.e_at(k), profile.e_at(k0)
    else:
        lhs = _eps_for_budget(sampled, 2 ** (2 ** k), BISECTION_TOL,
                              BISECTION_MAX_ITERS)
        base = _eps_for_budget(sampled, 2 ** (2 ** k0), BISECTION_TOL,
                               BISECTION_MAX_ITERS)
    rhs = 3.0 * 2.0 ** (2 ** k0 / dim) * base * 2.0 ** (-(2 ** k) / dim)
    return lhs <= rhs + 1e-12


def double_exponential_tail_sum(a: float, b: float, m: int,
                                rel_tol: float = 1e-18) -> float:
    """``sum_{k >= ceil(log2 m)} (2^{ak} 2^{-2^k/m})^b`` by direct summation."""
    if a <= 0 or b <= 0 or m < 2:
        raise ValueError("need a > 0, b > 0, m >= 2")
    k = math.ceil(math.log2(m))
    total = 0.0
    while True:
        log2_term = b * (a * k - (2.0 ** k) / m)
        term = 2.0 ** log2_term if log2_term > -1000 else 0.0
        total += term
        if term <= rel_tol * max(total, 1e-300) and 2.0 ** k > m:
            break
        k += 1
    return total


def double_exponential_tail_constant(a: float, b: float) -> float:
    """Closed-form constant with tail_sum <= constant * m^(a b)."""
    ab = a * b
    return 2.0 * max(2.0 ** (ab - 1.0), 1.0) * math.gamma(ab) / (b * math.log(2.0)) ** ab
