"""Sparse recovery from samples: greedy selection vs the exhaustive oracle.

Sample a function at certified nodes, approximate it by a few dictionary
elements in the sampled norm, and compare the greedy result against the
best-v-term oracle and the continuous recovery error.

Run:  python3 demos/06_sparse_recovery.py
"""

import numpy as np

import usdlab as u

dictionary = u.Dictionary.exponential_band(-5, 5)            # 11 elements

# Certify nodes for every 4-element subspace first (v = 2 recovery needs
# the 2v-sized collection for the one-sided constant).
coll = u.SubspaceCollection.all_subsets(dictionary, 4)
search = u.find_usd_points(coll, p=2, m=192, max_trials=20, rng_seed=21)
print(f"nodes certified: {search.passed} (D = "
      f"{search.certificate.one_sided_constant:.3f})")
xi = search.points

# A target with energy both inside and outside the dictionary span.
rng = np.random.default_rng(22)
inside = dictionary.combine((rng.standard_normal(11) +
                             1j * rng.standard_normal(11)) / 8)
outside = u.TrigPolynomial({7: 0.15, -8: 0.1})
target = inside + outside

report = u.recovery_pipeline(target, dictionary, xi, v=2, p=2,
                             method=("oracle", {}),
                             certificate=search.certificate,
                             compute_sigma_blended=True)
print(f"oracle best-2-term: sampled residual {report.discrete_residual:.5f}, "
      f"continuous error {report.continuous_error:.5f}")
print(f"blended-norm best-2-term {report.sigma_blended:.5f}; "
      f"2^(1/2)(2D+1) * that = "
      f"{2 ** 0.5 * (2 * report.one_sided_constant + 1) * report.sigma_blended:.5f}")

greedy = u.recovery_pipeline(target, dictionary, xi, v=2, p=2,
                             method=("wcga", {"max_iter": 2}),
                             certificate=search.certificate)
print(f"greedy 2 iterations: sampled residual {greedy.discrete_residual:.5f} "
      f"(oracle sigma_2 = {greedy.sigma_discrete:.5f})")
print(f"greedy iteration-budget reference (constant unknown): "
      f"{greedy.iteration_budget_reference:.1f}")

# Block-greedy approximation of a budgeted-smoothness element: keep the
# low levels whole, threshold each higher level to its scheduled count.
budget = u.SmoothnessBudget(a=1.0, b=0.0, d=1, max_level=14)
f = u.level_budget_element(budget, support_rule=512, rng_seed=23)
print("level cut n, total terms, continuous L2 error:")
for n in (3, 5, 7):
    res = u.block_greedy_approximant(f, n, beta=0.5)
    err = u.lp_norm(f - res.approximant, 2)
    print(f"  n={n}: {res.total_terms:5d} terms, error {err:.6f}")
