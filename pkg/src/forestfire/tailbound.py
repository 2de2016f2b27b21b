"""Exponential tail bound for the first burnout time on transitive graphs.

With S = -log(1 - p) and gamma = 1 - theta(p)^2 / p, the time eta until a
fixed vertex first burns satisfies

    P(eta > x) <= (x (1 - p) + 1) exp(-lambda x) / gamma,

where lambda is the smallest positive root of phi(lambda) = 1/gamma and
phi(t) = 1 / (1 - t exp(S (1 - t))) is the MGF of the time between
ignitions that close a window of length at least S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, EmptyRequestError
from .graph import GraphSpec, spans
from .simulator import RngLike, _gen

RESIDUAL_TOL = 1e-12


# 1/e as a double-double, so x + 1/e is exact near the branch point
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17


def lambert_w0(x: float, tol: float = 1e-15, maxiter: int = 100) -> float:
    """Principal branch of Lambert W for real x >= -1/e, by Halley iteration."""
    x = float(x)
    d = (x + _INV_E_HI) + _INV_E_LO  # x + 1/e
    if d < 0:
        if d > -1e-15:
            d = 0.0
        else:
            raise DomainError(f"W0 is real only for x >= -1/e, got {x}")
    if x == 0:
        return 0.0
    if d == 0:
        return -1.0
    if x < -0.25:
        return _w0_near_branch(d, tol, maxiter)
    if x < 3:
        w = x / (1 + x) if x > -0.1 else x - x * x
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1
        step = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        w -= step
        if abs(step) <= tol * (1 + abs(w)):
            break
    return w


def _w0_near_branch(d: float, tol: float, maxiter: int) -> float:
    # With q = W + 1, W e^W = x becomes h(q) = (q - 1) e^q + 1 = e (x + 1/e),
    # and h(q) = sum_{k>=2} (k-1) q^k / k! has no cancellation for small q.
    target = math.e * d
    p = math.sqrt(2 * target)
    q = p - p * p / 3 + 11 / 72 * p ** 3 - 43 / 540 * p ** 4
    for _ in range(maxiter):
        h = 0.0
        term = q
        k = 1
        while True:
            k += 1
            term *= q / k
            contrib = (k - 1) * term
            h += contrib
            if abs(contrib) <= 1e-17 * abs(h):
                break
        eq = math.exp(q)
        f = h - target
        d1 = q * eq
        d2 = (1 + q) * eq
        step = f / (d1 - f * d2 / (2 * d1))
        q -= step
        if abs(step) <= tol * abs(q):
            break
    return q - 1.0


def t_max(S: float) -> float:
    """Pole of phi: smallest positive root of t exp(S (1 - t)) = 1."""
    if not S > 0:
        raise DomainError("S must be positive")
    if S <= 1:
        return 1.0
    return -lambert_w0(-S * math.exp(-S)) / S


def phi_nu(t: float, S: float) -> float:
    """phi(t) = 1 / (1 - t exp(S (1 - t))) for 0 <= t < t_max(S)."""
    tm = t_max(S)
    if not 0 <= t < tm:
        raise DomainError(f"phi needs 0 <= t < t_max = {tm}, got {t}")
    return 1.0 / (1.0 - t * math.exp(S * (1.0 - t)))


def solve_lambda(gamma: float, S: float) -> float:
    """Root of gamma * phi(t) = 1 in (0, t_max).

    Equivalent to t exp(S (1 - t)) = 1 - gamma, whose left side increases on
    (0, t_max). Bisection for 40 halvings, then Newton steps kept inside the
    bracket.
    """
    if not 0 < gamma < 1:
        raise DomainError("gamma must lie in (0, 1)")
    tm = t_max(S)
    target = 1.0 - gamma

    def g(t):
        return t * math.exp(S * (1.0 - t)) - target

    lo, hi = 0.0, tm
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(20):
        gt = g(t)
        if gt == 0:
            break
        dg = math.exp(S * (1.0 - t)) * (1.0 - S * t)
        nt = t - gt / dg
        if not lo <= nt <= hi:
            break
        if gt < 0:
            lo = t
        else:
            hi = t
        if nt == t:
            break
        t = nt
    return t


@dataclass(frozen=True)
class TailBoundParams:
    """Everything the bound needs, derived from p and theta(p)."""

    p: float
    theta: float
    S: float = field(init=False)
    gamma: float = field(init=False)
    t_max: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise DomainError("p must lie in (0, 1)")
        if not 0 < self.theta <= 1:
            raise DomainError("theta must lie in (0, 1]")
        gamma = 1.0 - self.theta ** 2 / self.p
        if not 0 < gamma < 1:
            raise DomainError(f"gamma = 1 - theta^2/p = {gamma} is not in (0, 1)")
        S = -math.log1p(-self.p)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "t_max", t_max(S))
        object.__setattr__(self, "lam", solve_lambda(gamma, S))

    @classmethod
    def from_gamma(cls, p: float, gamma: float) -> "TailBoundParams":
        return cls(p, math.sqrt(p * (1.0 - gamma)))


def tail_bound(x, params: TailBoundParams, clamp: bool = True):
    """gamma^-1 (x (1 - p) + 1) exp(-lambda x), clamped to 1 by default."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("the bound is stated for x > 0")
    b = (x * (1.0 - params.p) + 1.0) * np.exp(-params.lam * x) / params.gamma
    if clamp:
        b = np.minimum(b, 1.0)
    return float(b) if b.ndim == 0 else b


def log_tail_bound(x, params: TailBoundParams):
    x = np.asarray(x, dtype=float)
    return np.log1p(x * (1.0 - params.p)) - params.lam * x - math.log(params.gamma)


def chernoff_exponent(x: float, gamma: float, S: float, m_grid: int = 400) -> float:
    """max over m in (0, x e^-S] of min over t in [0, t_max) of

        Lambda(t, m) = m log gamma + m log phi(t) - t x.

    Debug route for the optimization that collapses to -lambda x; the inner
    minimum uses bounded Brent on the convex t-problem and the outer maximum
    a grid refined by a bounded scalar search.
    """
    tm = t_max(S)
    log_gamma = math.log(gamma)

    def inner(m):
        def lam(t):
            return m * (log_gamma - math.log1p(-t * math.exp(S * (1.0 - t)))) - t * x
        res = minimize_scalar(lam, bounds=(0.0, tm * (1 - 1e-12)), method="bounded",
                              options={"xatol": 1e-13})
        return min(res.fun, lam(0.0))

    m_hi = x * math.exp(-S)
    ms = np.linspace(m_hi / m_grid, m_hi, m_grid)
    vals = np.array([inner(m) for m in ms])
    i = int(np.argmax(vals))
    a, b = ms[max(i - 1, 0)], ms[min(i + 1, m_grid - 1)]
    res = minimize_scalar(lambda m: -inner(m), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10 * m_hi})
    return max(float(vals[i]), -float(res.fun))


@dataclass(frozen=True)
class ThetaEstimate:
    value: float
    stderr: float
    replicas: int


def estimate_theta(g: GraphSpec, p: float, replicas: int, rng: RngLike) -> ThetaEstimate:
    """Finite-size stand-in for theta(p).

    Fraction of independent site configurations in which the origin lies
    in the largest occupied cluster and that cluster meets every row and
    column of the torus. On graphs without torus shape only the largest
    cluster condition is used. Sites are occupied when a uniform draw is
    below p, so the same rng couples different p monotonically.
    """
    if replicas < 1:
        raise EmptyRequestError("replicas must be at least 1")
    if not 0 < p <= 1:
        raise DomainError("p must lie in (0, 1]")
    gen = _gen(rng)
    hits = 0
    for _ in range(replicas):
        occupied = gen.random(g.n_vertices) < p
        if not occupied[g.origin]:
            continue
        labels = g.labels(occupied)
        sizes = np.bincount(labels)
        sizes[0] = 0
        biggest = int(np.argmax(sizes))
        if labels[g.origin] != biggest:
            continue
        if spans(g, np.flatnonzero(labels == biggest)):
            hits += 1
    est = hits / replicas
    return ThetaEstimate(est, math.sqrt(est * (1 - est) / replicas), replicas)
