"""
How long until a far vertex burns?
==================================

On a 64 x 64 torus with occupation probability p, the first burnout of a
distant vertex has an exponential tail whose rate lambda comes from the
percolation probability theta(p). theta is replaced by a finite-size
spanning-cluster estimate.
"""

import numpy as np

from forestfire import GraphSpec, RngHandle, TailBoundParams, estimate_theta, first_burnouts, tail_bound
from forestfire.stats import empirical_survival

g = GraphSpec.torus(64)
theta = estimate_theta(g, 0.75, 500, RngHandle(5, 1))
params = TailBoundParams(0.75, theta.value)
print(f"theta ~ {theta.value:.3f} +- {theta.stderr:.3f}")
print(f"S = {params.S:.4f}, gamma = {params.gamma:.4f}, lambda = {params.lam:.4f}")

fb = first_burnouts(g, g.far_vertex(), 1e6, 2000, RngHandle(5, 2))
xs = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
surv = empirical_survival(fb.times, xs).survival
for x, s, b in zip(xs, surv, tail_bound(xs, params)):
    print(f"x={x:>5}: empirical {s:.4f}  bound {b:.4f}")
