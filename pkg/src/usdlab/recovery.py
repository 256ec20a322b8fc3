"""Sparse approximation and sampling recovery in weighted discrete Lp norms.

All solvers act on a common instance shape: a value matrix of dictionary
elements at a finite node list, target values, node weights summing to one,
and an exponent p.  The plain sampled norm uses uniform weights 1/m; the
half-continuous norm used in recovery bounds mixes a dense quadrature grid
(weight 1/2) with the sample nodes (weight 1/2).

Solvers: weighted least squares at p = 2, damped IRLS otherwise, the weak
Chebyshev greedy algorithm (near-maximal norming-functional selection plus
full re-projection), the exhaustive best-v-term oracle, and the block
greedy method that keeps a full low-level partial sum and thresholds each
higher dyadic level to a scheduled term count.

Best-term errors are always reported for the concrete node set at hand;
the supremum of those errors over all possible node sets is not a
computable quantity and is deliberately out of scope.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary
from .discretization import UsdCertificate
from .errors import CapExceededError, RankDeficiencyError, ZeroResidualError
from .frequencies import level_of
from .points import PointSet
from .trigpoly import (DEFAULT_GRID_LEVEL, TrigPolynomial, lp_norm, sup_norm,
                       tensor_grid_points)

ORACLE_SUBSET_CAP = 10**6
IRLS_WEIGHT_FLOOR = 1e-12
IRLS_REL_TOL = 1e-10
IRLS_MAX_ITERS = 200


@dataclass
class DiscreteInstance:
    """Dictionary values, target values, and node weights for one problem."""

    dict_values: np.ndarray
    f_values: np.ndarray
    weights: np.ndarray
    p: float
    points: PointSet | None = None
    label: str = "uniform"

    def __post_init__(self):
        self.dict_values = np.asarray(self.dict_values, dtype=complex)
        self.f_values = np.asarray(self.f_values, dtype=complex)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.dict_values.ndim != 2:
            raise ValueError("dict_values must be a (nodes, elements) matrix")
        n = self.dict_values.shape[0]
        if self.f_values.shape != (n,) or self.weights.shape != (n,):
            raise ValueError("value and weight lengths must match the node count")
        if self.p <= 1:
            raise ValueError("p must be > 1 for the projection machinery")

    @property
    def n_elements(self) -> int:
        return self.dict_values.shape[1]

    def norm(self, values) -> float:
        return float((self.weights @ np.abs(values) ** self.p) ** (1.0 / self.p))

    @classmethod
    def from_function(cls, f: TrigPolynomial, dictionary: Dictionary,
                      xi: PointSet, p: float) -> "DiscreteInstance":
        m = xi.size
        return cls(dictionary.values_at(xi), f.evaluate(xi),
                   np.full(m, 1.0 / m), p, xi, "uniform")

    @classmethod
    def blended(cls, f: TrigPolynomial, dictionary: Dictionary, xi: PointSet,
                p: float, grid_level: int = DEFAULT_GRID_LEVEL) -> "DiscreteInstance":
        """Nodes = dense grid (weight 1/2) plus the samples (weight 1/2)."""
        max_freq = max(f.max_component_frequency(),
                       dictionary.max_component_frequency())
        n_grid = max(2 * max_freq + 1, 2 ** grid_level)
        grid = tensor_grid_points(n_grid, dictionary.dimension)
        a = np.concatenate([dictionary.values_at(grid),
                            dictionary.values_at(xi)], axis=0)
        b = np.concatenate([f.evaluate(grid), f.evaluate(xi)])
        w = np.concatenate([np.full(grid.shape[0], 0.5 / grid.shape[0]),
                            np.full(xi.size, 0.5 / xi.size)])
        return cls(a, b, w, p, xi, "blended")


@dataclass
class ProjectionResult:
    coefficients: np.ndarray
    residual: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int


def _weighted_lstsq(a, b, w):
    sw = np.sqrt(w)
    sol, _, rank, _ = np.linalg.lstsq(sw[:, None] * a, sw * b, rcond=None)
    return sol, rank


def chebyshev_projection(inst: DiscreteInstance, subset, init=None,
                         rel_tol: float = IRLS_REL_TOL,
                         max_iters: int = IRLS_MAX_ITERS) -> ProjectionResult:
    """Best approximation from the selected columns in the instance norm.

    p = 2 solves the weighted normal equations directly.  Other p run
    iteratively reweighted least squares with a 0.5 step damping whenever a
    step fails to decrease the residual norm, stopping when successive
    residual norms change by at most ``rel_tol`` relatively.
    """
    subset = tuple(int(i) for i in subset)
    b = inst.f_values
    if not subset:
        return ProjectionResult(np.zeros(0, dtype=complex), b.copy(),
                                inst.norm(b), True, 0)
    a = inst.dict_values[:, subset]
    coeffs, rank = _weighted_lstsq(a, b, inst.weights)
    if rank < len(subset):
        raise RankDeficiencyError(
            f"columns {subset} are rank deficient at the given nodes")
    if inst.p == 2:
        r = b - a @ coeffs
        return ProjectionResult(coeffs, r, inst.norm(r), True, 1)

    c = coeffs if init is None else np.asarray(init, dtype=complex)
    r = b - a @ c
    phi = inst.norm(r)
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        if phi == 0.0:
            converged = True
            break
        omega = np.maximum(np.abs(r), IRLS_WEIGHT_FLOOR) ** (inst.p - 2.0)
        c_step, _ = _weighted_lstsq(a, b, inst.weights * omega)
        step = 1.0
        cand, phi_cand = c, phi
        improved = False
        for _ in range(50):
            trial = c + step * (c_step - c)
            r_trial = b - a @ trial
            phi_trial = inst.norm(r_trial)
            if phi_trial <= phi * (1.0 + 1e-15):
                cand, r, phi_cand = trial, r_trial, phi_trial
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True  # stationary within floating precision
            break
        change = (phi - phi_cand) / max(phi, 1e-300)
        c, phi = cand, phi_cand
        if change <= rel_tol:
            converged = True
            break
    return ProjectionResult(c, r, phi, converged, iterations)


def _dual_vector(residual, p, weights):
    a = np.abs(residual)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(a > 0.0, a ** (p - 2.0), 0.0)
    return weights * scale * np.conj(residual)


def norming_functional_action(residual, g, p: float, weights=None) -> complex:
    """Action of the residual's norming functional on one value vector.

    ``F(g) = ||r||^(1-p) sum_i w_i |r_i|^(p-1) sign*(r_i) g_i`` with
    ``sign*(z) = conj(z)/|z|`` (0 at z = 0), so F(r) equals ||r|| and
    |F(g)| <= ||g|| by Hoelder.  Uniform weights 1/m by default.
    """
    residual = np.asarray(residual, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if weights is None:
        weights = np.full(residual.size, 1.0 / residual.size)
    norm = float((weights @ np.abs(residual) ** p) ** (1.0 / p))
    if norm == 0.0:
        raise ZeroResidualError("norming functional of a zero residual")
    return complex(norm ** (1.0 - p) * (_dual_vector(residual, p, weights) @ g))


@dataclass
class SparseApproximant:
    """Support, coefficients, and the per-iteration trace of a sparse fit."""

    support: tuple
    coefficients: np.ndarray
    residual_norm: float
    trace: list = field(default_factory=list)
    converged: bool = True
    method: str = ""

    def to_json(self):
        return {
            "method": self.method,
            "support": list(self.support),
            "coefficients": [[float(c.real), float(c.imag)]
                             for c in np.asarray(self.coefficients)],
            "residual_norm": float(self.residual_norm),
            "converged": bool(self.converged),
            "trace": self.trace,
        }


def weak_chebyshev_greedy(inst: DiscreteInstance, t: float = 1.0,
                          max_iter: int = 100,
                          stop_tol: float = 1e-12) -> SparseApproximant:
    """Greedy selection by norming-functional action with full re-projection.

    Each iteration scores every unselected element by |F(g_i)| for the
    current residual's norming functional, takes the maximizer (which
    satisfies any weakness parameter t in (0, 1]; ties go to the lowest
    index), and re-projects onto everything selected so far.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("weakness parameter t must lie in (0, 1]")
    b = inst.f_values
    weights = inst.weights
    support: list = []
    coeffs = np.zeros(0, dtype=complex)
    residual = b.copy()
    res_norm = inst.norm(residual)
    trace = []
    for it in range(1, max_iter + 1):
        if res_norm <= stop_tol:
            break
        scores = np.abs(res_norm ** (1.0 - inst.p)
                        * (_dual_vector(residual, inst.p, weights) @ inst.dict_values))
        if support:
            scores[np.asarray(support)] = -1.0
        pick = int(np.argmax(scores))
        if scores[pick] <= 1e-15 * max(1.0, res_norm):
            break  # residual is orthogonal to the remaining dictionary
        support.append(pick)
        init = np.append(coeffs, 0.0) if inst.p != 2 else None
        proj = chebyshev_projection(inst, support, init=init)
        coeffs = proj.coefficients
        residual = proj.residual
        res_norm = proj.residual_norm
        trace.append({"iteration": it, "index": pick,
                      "functional": float(scores[pick]),
                      "residual_norm": float(res_norm)})
    return SparseApproximant(tuple(support), coeffs, res_norm, trace,
                             converged=res_norm <= stop_tol,
                             method=f"wcga(t={t})")


def wcga_iteration_budget(v: int, one_sided_constant: float,
                          riesz_constant: float, c: float = 1.0) -> float:
    """Reference iteration count ``c * V^2 ln(V v) * v`` with V = D sqrt(K).

    The constant c is unknown; the value is logged for comparison against
    empirically sufficient iteration counts, never asserted.
    """
    big_v = one_sided_constant * math.sqrt(riesz_constant)
    return c * big_v ** 2 * math.log(max(big_v * v, 2.0)) * v


def best_v_term_oracle(inst: DiscreteInstance, v: int,
                       cap: int = ORACLE_SUBSET_CAP) -> SparseApproximant:
    """Exhaustive best v-term approximation in the instance norm.

    Ties go to the lexicographically first subset.  Refuses when the
    subset count C(N, v) exceeds the cap.
    """
    n = inst.n_elements
    if v < 0 or v > n:
        raise ValueError("sparsity v must satisfy 0 <= v <= N")
    if v == 0:
        return SparseApproximant((), np.zeros(0, dtype=complex),
                                 inst.norm(inst.f_values), [], True,
                                 "exhaustive(v=0)")
    count = math.comb(n, v)
    if count > cap:
        raise CapExceededError(
            f"exhaustive search over {count} subsets exceeds the cap {cap}",
            predicted=count, cap=cap)
    best = None
    best_subset = None
    for subset in itertools.combinations(range(n), v):
        res = chebyshev_projection(inst, subset)
        if best is None or res.residual_norm < best.residual_norm:
            best, best_subset = res, subset
    return SparseApproximant(best_subset, best.coefficients,
                             best.residual_norm, [], best.converged,
                             f"exhaustive(v={v})")


def best_v_term_error_blended(f: TrigPolynomial, dictionary: Dictionary,
                              xi: PointSet, v: int, p: float,
                              grid_level: int = DEFAULT_GRID_LEVEL,
                              cap: int = ORACLE_SUBSET_CAP) -> float:
    """Best v-term error in the half-continuous half-empirical norm."""
    inst = DiscreteInstance.blended(f, dictionary, xi, p, grid_level)
    return best_v_term_oracle(inst, v, cap).residual_norm


def best_v_term_sup_estimate(f: TrigPolynomial, dictionary: Dictionary,
                             v: int, grid_level: int = DEFAULT_GRID_LEVEL,
                             cap: int = ORACLE_SUBSET_CAP) -> float:
    """Upper estimate of the best v-term error in the uniform norm.

    Substitutes the continuous-L2 projection for the true uniform-norm
    projection on every subset; each candidate is feasible, so the minimum
    over subsets upper-bounds the true uniform best v-term error.
    """
    n = dictionary.size
    if v == 0:
        return sup_norm(f, grid_level)
    count = math.comb(n, v)
    if count > cap:
        raise CapExceededError(
            f"exhaustive search over {count} subsets exceeds the cap {cap}",
            predicted=count, cap=cap)
    best = math.inf
    for subset in itertools.combinations(range(n), v):
        coeffs = dictionary.l2_project(f, subset)
        approx = dictionary.combine(coeffs, subset)
        best = min(best, sup_norm(f - approx, grid_level))
    return best


def block_term_count(n: int, beta: float, d: int, j: int) -> int:
    """Scheduled term count ``floor(2^{n - beta (j - n)} max(j,1)^{d-1})``."""
    return int(math.floor(2.0 ** (n - beta * (j - n)) * max(j, 1) ** (d - 1)))


def block_term_schedule(n: int, beta: float, d: int) -> list:
    """Pairs (level, term count) from level n until the counts vanish."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    out = []
    j = n
    prev = math.inf
    while True:
        x = 2.0 ** (n - beta * (j - n)) * max(j, 1) ** (d - 1)
        count = int(math.floor(x))
        if count >= 1:
            out.append((j, count))
        elif x < 1.0 and x < prev:
            break  # geometric decay has won over the polynomial factor
        prev = x
        j += 1
    return out


@dataclass
class BlockGreedyResult:
    approximant: TrigPolynomial
    total_terms: int
    schedule: list
    level_cut: int
    beta: float
    sparsity_reference: float  # the 2^n n^(d-1) scale the schedule targets

    def to_json(self):
        return {
            "total_terms": int(self.total_terms),
            "level_cut": int(self.level_cut),
            "beta": float(self.beta),
            "schedule": [[int(j), int(v)] for j, v in self.schedule],
            "sparsity_reference": float(self.sparsity_reference),
            "approximant": self.approximant.to_json(),
        }


def _wcga_level_approximant(entries, d, count, p, target_points, grid_level):
    """Greedy cross-check path: run the weak greedy on one level block."""
    from .frequencies import FrequencySet

    block = TrigPolynomial(dict(entries), d)
    block_dict = Dictionary.exponentials(
        FrequencySet.from_indices([k for k, _ in entries]))
    if target_points is None:
        n_grid = max(2 * block.max_component_frequency() + 1, 2 ** grid_level)
        target_points = PointSet.explicit(tensor_grid_points(n_grid, d))
    inst = DiscreteInstance.from_function(block, block_dict, target_points, p)
    appr = weak_chebyshev_greedy(inst, max_iter=count)
    return block_dict.combine(appr.coefficients, appr.support)


def block_greedy_approximant(f: TrigPolynomial, n: int, beta: float,
                             p: float = 2.0, use_wcga: bool = False,
                             target_points: PointSet | None = None,
                             grid_level: int = DEFAULT_GRID_LEVEL) -> BlockGreedyResult:
    """Keep all levels below n, then threshold each level j >= n.

    Level j keeps its scheduled number of largest-modulus coefficients
    (ties to the lexicographically smaller frequency).  With per-level
    Wiener budgets this realizes the square-root gain of l1-budget greedy
    approximation while keeping the total term count of order
    ``2^n n^(d-1)``.  The dyadic decomposition is derived exactly from the
    coefficient support.

    ``use_wcga`` swaps the per-level thresholding for the weak greedy run
    in the Lp norm over ``target_points`` (a dense grid when omitted); on
    orthonormal blocks with exact quadrature the two paths agree, which is
    the intended cross-check.
    """
    if n < 1:
        raise ValueError("the partial-sum cut n must be >= 1")
    d = f.dimension
    keep = {}
    blocks: dict = {}
    for k, c in f.coeffs.items():
        j = level_of(k)
        if j < n:
            keep[k] = c
        else:
            blocks.setdefault(j, []).append((k, c))
    schedule = block_term_schedule(n, beta, d)
    for j, count in schedule:
        entries = blocks.get(j)
        if not entries:
            continue
        if use_wcga:
            approx_block = _wcga_level_approximant(entries, d, count, p,
                                                   target_points, grid_level)
            keep.update(approx_block.coeffs)
            continue
        entries.sort(key=lambda kc: (-abs(kc[1]), kc[0]))
        for k, c in entries[:count]:
            keep[k] = c
    approx = TrigPolynomial(keep, d)
    reference = 2.0 ** n * max(n, 1) ** (d - 1)
    return BlockGreedyResult(approx, len(keep), schedule, n, beta, reference)


@dataclass
class RecoveryReport:
    """Everything measured in one sample-then-approximate run."""

    method: str
    sparsity: int
    discrete_residual: float
    continuous_error: float
    sigma_discrete: float | None
    sigma_blended: float | None
    one_sided_constant: float | None
    flags: list
    trace: list
    certificate: dict | None
    iteration_budget_reference: float | None = None

    def to_json(self):
        return {
            "method": self.method,
            "sparsity": int(self.sparsity),
            "discrete_residual": float(self.discrete_residual),
            "continuous_error": float(self.continuous_error),
            "sigma_discrete": None if self.sigma_discrete is None else float(self.sigma_discrete),
            "sigma_blended": None if self.sigma_blended is None else float(self.sigma_blended),
            "one_sided_constant": (None if self.one_sided_constant is None
                                   else float(self.one_sided_constant)),
            "iteration_budget_reference": (
                None if self.iteration_budget_reference is None
                else float(self.iteration_budget_reference)),
            "flags": list(self.flags),
            "trace": self.trace,
            "certificate": self.certificate,
        }


def recovery_pipeline(f: TrigPolynomial, dictionary: Dictionary, xi: PointSet,
                      v: int, p: float, method=("oracle", {}),
                      grid_level: int = DEFAULT_GRID_LEVEL,
                      certificate: UsdCertificate | None = None,
                      compute_sigma_discrete: bool = True,
                      compute_sigma_blended: bool = False,
                      oracle_cap: int = ORACLE_SUBSET_CAP) -> RecoveryReport:
    """Sample f at xi, approximate in the sampled norm, measure everything.

    Reports the discrete residual, the continuous Lp recovery error, the
    one-sided constant of the certificate (when given; a missing or
    heuristic certificate is flagged, not fatal), and the exhaustive
    best-v-term errors in the sampled and half-continuous norms when the
    subset count is affordable.
    """
    kind, params = method
    inst = DiscreteInstance.from_function(f, dictionary, xi, p)
    trace: list = []
    if kind == "wcga":
        appr = weak_chebyshev_greedy(inst, t=params.get("t", 1.0),
                                     max_iter=params.get("max_iter", max(v, 1)),
                                     stop_tol=params.get("stop_tol", 1e-12))
        approx_poly = dictionary.combine(appr.coefficients, appr.support)
        discrete_residual = appr.residual_norm
        sparsity = len(appr.support)
        trace = appr.trace
        label = appr.method
    elif kind == "oracle":
        appr = best_v_term_oracle(inst, v, cap=oracle_cap)
        approx_poly = dictionary.combine(appr.coefficients, appr.support)
        discrete_residual = appr.residual_norm
        sparsity = len(appr.support)
        label = appr.method
    elif kind == "block":
        use_wcga = params.get("use_wcga", False)
        result = block_greedy_approximant(
            f, params["n"], params["beta"], p, use_wcga=use_wcga,
            target_points=xi if use_wcga else None, grid_level=grid_level)
        approx_poly = result.approximant
        diff_at_xi = f.evaluate(xi) - approx_poly.evaluate(xi)
        discrete_residual = inst.norm(diff_at_xi)
        sparsity = result.total_terms
        label = f"block(n={params['n']}, beta={params['beta']})"
    else:
        raise ValueError(f"unknown recovery method {kind!r}")

    continuous_error = lp_norm(f - approx_poly, p, grid_level)
    sigma_discrete = None
    if compute_sigma_discrete and math.comb(inst.n_elements, v) <= oracle_cap:
        sigma_discrete = best_v_term_oracle(inst, v, cap=oracle_cap).residual_norm
    sigma_blended = None
    if compute_sigma_blended:
        sigma_blended = best_v_term_error_blended(f, dictionary, xi, v, p,
                                                  grid_level, oracle_cap)
    flags = []
    one_sided = None
    cert_json = None
    budget_ref = None
    if certificate is None:
        flags.append("uncertified_points")
    else:
        one_sided = certificate.one_sided_constant
        cert_json = certificate.to_json()
        if certificate.heuristic:
            flags.append("heuristic_certificate")
        if not certificate.passed:
            flags.append("certificate_failed")
        if dictionary.riesz_constant is not None and v >= 1 \
                and math.isfinite(one_sided):
            budget_ref = wcga_iteration_budget(v, one_sided,
                                               dictionary.riesz_constant)
    return RecoveryReport(label, sparsity, float(discrete_residual),
                          float(continuous_error), sigma_discrete,
                          sigma_blended, one_sided, flags, trace, cert_json,
                          budget_ref)
