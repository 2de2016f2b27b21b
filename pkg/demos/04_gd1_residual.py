"""
Residual waiting times: GD(1)
=============================

U1 + U1 U2 + U1 U2 U3 + ... with uniform U's has CDF e^-gamma times the
integral of rho. A direct sampler and the table-based CDF should agree.
"""

import numpy as np

from forestfire import RngHandle, gd1_cdf, gd1_sample
from forestfire.stats import ks_statistic

draws = gd1_sample(RngHandle(4), size=100_000)
print(f"mean {draws.mean():.4f} (exact 1), variance {draws.var():.4f}")
print(f"KS against e^-gamma int rho: {ks_statistic(draws, gd1_cdf):.4f}")

for x in (0.5, 1.0, 2.0, 4.0):
    print(f"P(X <= {x}) empirical {np.mean(draws <= x):.4f}  table {gd1_cdf(x):.4f}")
