"""Covering-radius profile of a sampled class and the entropy-sum bound.

The class is sampled onto a shared dense grid, covered greedily in the
uniform metric, and the resulting profile feeds the entropy-sum functional
that upper-bounds the expected discretization gap (up to an unknown
absolute constant, which is reported and never asserted).

Run:  python3 demos/05_entropy_profile_and_chaining.py
"""

import numpy as np

import usdlab as u
from usdlab.experiments import fit_rate, random_l1_ball_elements

dictionary = u.Dictionary.exponential_band(-16, 16)
sampled = u.SampledClass.from_l1_ball(dictionary, n_representatives=512,
                                      grid_level=9, seed=11)
profile = u.entropy_numbers(sampled, n_max=16)
print("covering radii eps_n (2^n centers allowed):")
for n in range(0, 10):
    print(f"  n={n:2d}: {profile.eps[n]:.4f}")
print(f"radii vanish from n={profile.zero_from} on "
      f"(the budget covers the whole sample)")

pts = [(n, profile.eps[n]) for n in range(2, 10) if profile.eps[n] > 0]
fit = fit_rate(pts)
print(f"decay exponent over n=2..9: {fit.slope:.3f}")

# The doubly exponential ladder e_k reads off the same profile.
print("ladder e_k:", [round(v, 4) for v in profile.e_sequence()])

# Entropy-sum bound vs measured decay for a finite sub-family.
family = random_l1_ball_elements(dictionary, count=8, seed=12)
print("m      measured gap   entropy-sum value   implied constant")
for i, m in enumerate([32, 128, 512]):
    mean, _ = u.expected_sup_estimate(family, p=2, m=m, mc_trials=60,
                                      rng_seed=[12, i])
    bound = u.chaining_bound(profile, p=2, sup_bound=1.0, m=m)
    print(f"{m:5d}  {mean:12.6f}   {bound:17.6f}   {mean / bound:16.4f}")

# The dyadic form of the sum never exceeds 2*sqrt(2) times the flat form.
flat = u.chaining_bound(profile, 2, 1.0, 128)
dyadic = u.chaining_bound_dyadic(profile, 2, 1.0, 128)
print(f"dyadic/flat sum ratio: {dyadic / flat:.4f} (<= {2 * np.sqrt(2):.4f})")
