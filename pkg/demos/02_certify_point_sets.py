"""Certifying that a point set discretizes every subspace of a collection.

A set of m nodes discretizes a subspace when the empirical p-th power mean
of |f| stays within [1/2, 3/2] of the continuous one over the whole unit
sphere.  At p = 2 the extreme ratios are generalized eigenvalues and the
check is exact.

Run:  python3 demos/02_certify_point_sets.py
"""

import numpy as np

import usdlab as u

dictionary = u.Dictionary.exponential_band(-4, 4)

# Equispaced nodes with m >= 2*maxfreq + 1 integrate trigonometric
# polynomials exactly, so every ratio is 1.
equi = u.PointSet.equispaced(32, 1)
res = u.subspace_ratio_bounds(range(9), dictionary, equi, 2)
print(f"equispaced full-space ratios: [{res.min_ratio:.12f}, {res.max_ratio:.12f}]")

# Random nodes concentrate near ratio 1 as m grows; the certificate tracks
# every 2-element subspace at once.
coll = u.SubspaceCollection.all_subsets(dictionary, 2)
for m in (16, 64, 256):
    xi = u.PointSet.random_uniform(m, 1, seed=5)
    cert = u.check_usd(xi, coll, 2)
    print(f"m={m:4d}: passed={cert.passed}  window="
          f"[{min(cert.min_ratios):.3f}, {max(cert.max_ratios):.3f}]  "
          f"one-sided constant D={cert.one_sided_constant:.3f}")

# A degenerate set fails loudly: any 2-dimensional span contains a
# function vanishing on a single repeated node.
bad = u.PointSet.explicit(np.zeros((3, 1)))
cert = u.check_usd(bad, coll, 2)
print(f"repeated node: passed={cert.passed}, worst violation "
      f"{cert.worst_violation():.3f}")

# Certificates serialize with their per-subspace ratio arrays so an
# external audit can recheck them.
payload = cert.to_json()
print("serialized certificate keys:", sorted(payload))
