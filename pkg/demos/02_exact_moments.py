"""
Exact moments and the alternating sums behind them
==================================================

E tau_n is exp(A_n), where A_n is an alternating binomial sum of logs.
In double precision the sum is garbage past n of about 40; with enough
guard bits, or through an integral that never alternates, it is fine.
"""

import math

from forestfire import exact

# naive float evaluation falls apart quickly
for n in (10, 40, 60, 80):
    naive = sum(math.comb(n + 1, i) * (-1) ** i * math.log(i) for i in range(1, n + 2))
    good = float(exact.A(n, "integral"))
    print(f"A_{n:<3} float sum {naive: .6e}   integral {good:.12f}")

###############################################################################
# The two careful routes agree, and A_n - log log n creeps down to gamma

print("alternating - integral at n=200:",
      float(exact.A(200, "alternating") - exact.A(200, "integral")))
for n in (10**3, 10**4, 10**5, 10**6):
    print(f"n=1e{int(math.log10(n))}  A_n - log log n = {float(exact.A_limit_gap(n)):.6f}")
print("gamma =", float(exact.euler_gamma()))

###############################################################################
# a(n, m): alternating definition, nested harmonic sums, and the asymptote

print("a(3, 2) =", exact.a(3, 2, "alternating"), "=", exact.a(3, 2, "nested"))
n = 10**6
for m in (1, 2, 3):
    val = exact.a(n, m, "nested", exact=False)
    print(f"a(1e6, {m}) = {val:.4f}   asymptotic {float(exact.a(n, m, 'asymptotic')):.4f}")
