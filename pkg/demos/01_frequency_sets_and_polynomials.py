"""Tour of the building blocks: frequency sets, polynomials, norms.

Run:  python3 demos/01_frequency_sets_and_polynomials.py
"""

import numpy as np

import usdlab as u

# A hyperbolic cross keeps every integer vector whose componentwise
# magnitudes (floored at 1) multiply to at most N.  In one dimension that
# is just the band |k| <= N; in higher dimension the set is much thinner
# than the full box.
cross = u.hyperbolic_cross(4, 2)
box_size = 9 ** 2
print(f"hyperbolic cross N=4, d=2: {len(cross)} of {box_size} box indices")
print("  predicted without enumerating:", u.hyperbolic_cross_size(4, 2))

# Dyadic blocks partition Z^d; every frequency lives in exactly one.
for s in [(0,), (1,), (2,), (3,)]:
    print(f"  block s={s}: {list(u.dyadic_block(s))}")
print("  level of k=(-5,):", u.level_of((-5,)))

# Polynomials are coefficient maps.  Evaluation, norms, and serialization
# all iterate frequencies in lexicographic order.
f = u.TrigPolynomial({1: 0.5, -1: 0.5, 3: 0.25})
x = np.linspace(0, 2 * np.pi, 5, endpoint=False)
print("values:", np.round(f.evaluate(x), 4))
print("L2 norm (exact, from coefficients):", u.lp_norm(f, 2))
print("L4 norm (tensor-grid rectangle rule):", round(u.lp_norm(f, 4), 12))
info = u.sup_norm_info(f)
print(f"sup-norm estimate {info.value:.6f} on {info.points_per_dim} grid "
      f"points ({info.oversampling:.0f}x oversampled)")

# The smoothness generators: a power-decay kernel and elements whose
# dyadic levels carry exact Wiener-norm budgets.
kernel = u.bernoulli_kernel(1.5, max_freq=64)
print("kernel tail bound after truncation:",
      u.bernoulli_kernel_tail_bound(1.5, 64))
budget = u.SmoothnessBudget(a=1.0, b=0.0, d=1, max_level=6)
g = u.level_budget_element(budget, support_rule=8, rng_seed=7)
print("per-level coefficient-l1 mass of a generated element:")
for level, mass in u.level_a_norms(g).items():
    print(f"  level {level}: {mass:.6f} (budget {budget.level_budget(level):.6f})")
