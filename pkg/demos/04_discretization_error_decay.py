"""Monte-Carlo decay of the worst discretization gap over a finite class.

For a fixed finite family of functions, the expected worst gap between the
continuous p-th power norm and its m-node empirical average decays like
m^(-1/2).  This sweep measures the decay and fits the exponent.

Run:  python3 demos/04_discretization_error_decay.py
"""

import usdlab as u
from usdlab.experiments import fit_rate, random_l1_ball_elements

dictionary = u.Dictionary.exponential_band(-8, 8)
family = random_l1_ball_elements(dictionary, count=10, seed=3)
print(f"class: {len(family)} random unit-coefficient-mass expansions over "
      f"{dictionary.size} exponentials")

rows = []
for i, m in enumerate([16, 32, 64, 128, 256, 512, 1024]):
    mean, stderr = u.expected_sup_estimate(family, p=2, m=m, mc_trials=100,
                                           rng_seed=[3, i])
    rows.append((m, mean))
    print(f"m={m:5d}: mean worst gap {mean:.6f} (stderr {stderr:.2g})")

fit = fit_rate(rows)
print(f"fitted decay exponent: {fit.slope:.4f} "
      f"(95% half-width {fit.half_width:.4f}; square-root decay predicts -0.5)")
