"""
Burnout streams on the half-line
================================

The origin burns at the points of a rate-1 Poisson process. Site n+1 can
only burn when site n does, so its burnout times are a subsequence of its
parent's. Here we watch that thinning happen and compare sampled gaps with
the exact moments.
"""

import numpy as np

from forestfire import RngHandle, exact, propagate, sample_site0, sample_tau

# a short stream at the origin, then two propagation steps
s0 = sample_site0(12, RngHandle(1))
s1 = propagate(s0, RngHandle(1, 1))
s2 = propagate(s1, RngHandle(1, 2))
for s in (s0, s1, s2):
    print(f"site {s.site_index}:", np.round(s.times, 2))

# every child time is one of the parent times
print("subsequence:", bool(np.isin(s2.times, s1.times).all()))

###############################################################################
# Gap statistics against exact values

for n in (0, 1, 2, 10):
    gaps = sample_tau(n, 200_000, RngHandle(2, n))
    mu = float(exact.mean_tau(n))
    var = float(exact.variance_tau(n))
    print(f"n={n:>2}  mean {gaps.mean():.4f} (exact {mu:.4f})  "
          f"var {gaps.var():.4f} (exact {var:.4f})")
