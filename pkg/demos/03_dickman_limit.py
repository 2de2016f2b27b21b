"""
The Dickman limit of tau_n / log n
==================================

Rescaled by log n, the gap at site n converges in law to a variable with
survival function rho, the Dickman function. Convergence is slow, which
this script makes visible in both the MGF and the KS distance.
"""

import math

from forestfire import RngHandle, dickman_cdf, dickman_rho, exact, limit_mgf, sample_tau
from forestfire.stats import ks_statistic

for x in (1.0, 2.0, 3.0, 5.0, 10.0):
    print(f"rho({x:>4}) = {dickman_rho(x):.6e}")

###############################################################################
# Finite-n MGF at s / log n against the limit

for s in (-1.0, -0.5, 0.25):
    row = [abs(float(exact.mgf(n, s / math.log(n), "integral")) - limit_mgf(s))
           for n in (10**2, 10**3, 10**4, 10**6)]
    print(f"s={s:>5}: " + "  ".join(f"{d:.4f}" for d in row))

###############################################################################
# Sampled tau_n / log n against 1 - rho

for n in (10, 100, 1000):
    gaps = sample_tau(n, 50_000, RngHandle(3, n))
    print(f"n={n:>5}  KS = {ks_statistic(gaps / math.log(n), dickman_cdf):.4f}")
