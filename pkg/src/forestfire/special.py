"""Special functions for the limit law of tau_n / log n.

The limit has survival function rho, the Dickman function, solving
rho = 1 on [0, 1] and x rho'(x) = -rho(x - 1) for x > 1. Its MGF is
1 + s exp(gamma + sum_m s^m / (m m!)), i.e. 1 + sign(s) exp(Ei(s)) with
the real principal value of Ei. Residual waiting times converge to GD(1),
with CDF e^-gamma * int_0^x rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .errors import DomainError
from .simulator import RngLike, _gen

EULER_GAMMA = 0.57721566490153286061
STEPS_PER_UNIT = 1024
DEFAULT_X_MAX = 20

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)
_GL_NODES = (_GL_NODES + 1) / 2
_GL_WEIGHTS = _GL_WEIGHTS / 2


@dataclass(frozen=True)
class DickmanTable:
    """rho on the grid x_j = j h, 0 <= x_j <= x_max, with cubic Hermite pieces.

    ``coef[j]`` holds a0..a3 such that rho(x_j + s h) = a0 + a1 s + a2 s^2 + a3 s^3
    for s in [0, 1]; ``cumint[j]`` is int_0^{x_j} rho.
    """

    h: float
    x_max: int
    rho: np.ndarray
    coef: np.ndarray
    cumint: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.rho.size) * self.h

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("rho is tabulated for x >= 0 only")
        if np.any(x > self.x_max):
            raise DomainError(f"x beyond table range {self.x_max}")
        u = x / self.h
        j = np.minimum(np.floor(u).astype(np.intp), self.coef.shape[0] - 1)
        return j, u - j

    def __call__(self, x):
        j, s = self._locate(x)
        c = self.coef[j]
        return ((c[..., 3] * s + c[..., 2]) * s + c[..., 1]) * s + c[..., 0]

    def derivative(self, x):
        j, s = self._locate(x)
        c = self.coef[j]
        return ((3 * c[..., 3] * s + 2 * c[..., 2]) * s + c[..., 1]) / self.h

    def integral(self, x):
        """int_0^x rho."""
        j, s = self._locate(x)
        c = self.coef[j]
        part = (((c[..., 3] / 4 * s + c[..., 2] / 3) * s + c[..., 1] / 2) * s + c[..., 0]) * s
        return self.cumint[j] + self.h * part


def _hermite(y0, y1, d0, d1, h):
    a1 = h * d0
    a2 = -3 * y0 - 2 * a1 + 3 * y1 - h * d1
    a3 = 2 * y0 + a1 - 2 * y1 + h * d1
    return np.stack([y0, a1, a2, a3], axis=-1)


def build_dickman_table(x_max: int = DEFAULT_X_MAX, steps_per_unit: int = STEPS_PER_UNIT) -> DickmanTable:
    """Tabulate rho on [0, x_max] one unit interval at a time.

    [0, 1] and [1, 2] use the closed forms 1 and 1 - log x. On [k, k+1]
    each step adds -int rho(t-1)/t dt by 4-point Gauss-Legendre, reading
    rho(t-1) off the finished Hermite pieces of [k-1, k].
    """
    x_max = int(math.ceil(x_max))
    if x_max < 2:
        raise DomainError("x_max must be at least 2")
    N = int(steps_per_unit)
    h = 1.0 / N
    steps = x_max * N
    rho = np.empty(steps + 1)
    coef = np.empty((steps, 4))

    rho[: N + 1] = 1.0
    coef[:N] = _hermite(np.ones(N), np.ones(N), np.zeros(N), np.zeros(N), h)

    x = 1.0 + np.arange(N + 1) * h
    rho[N: 2 * N + 1] = 1.0 - np.log(x)
    d = -1.0 / x
    coef[N: 2 * N] = _hermite(rho[N: 2 * N], rho[N + 1: 2 * N + 1], d[:-1], d[1:], h)

    for k in range(2, x_max):
        lo = k * N
        prev = coef[lo - N: lo]  # pieces on [k-1, k]
        s = _GL_NODES
        rho_shift = ((prev[:, 3:4] * s + prev[:, 2:3]) * s + prev[:, 1:2]) * s + prev[:, 0:1]
        t = k + (np.arange(N)[:, None] + s) * h
        inc = h * (rho_shift / t) @ _GL_WEIGHTS
        rho[lo + 1: lo + N + 1] = rho[lo] - np.cumsum(inc)
        xs = k + np.arange(N + 1) * h
        d = -rho[lo - N: lo + 1] / xs
        coef[lo: lo + N] = _hermite(rho[lo: lo + N], rho[lo + 1: lo + N + 1], d[:-1], d[1:], h)

    piece = h * (coef[:, 0] + coef[:, 1] / 2 + coef[:, 2] / 3 + coef[:, 3] / 4)
    cumint = np.concatenate([[0.0], np.cumsum(piece)])
    for arr in (rho, coef, cumint):
        arr.setflags(write=False)
    return DickmanTable(h=h, x_max=x_max, rho=rho, coef=coef, cumint=cumint)


@lru_cache(maxsize=8)
def dickman_table(x_max: int = DEFAULT_X_MAX, steps_per_unit: int = STEPS_PER_UNIT) -> DickmanTable:
    """Shared, immutable table for the given range."""
    return build_dickman_table(x_max, steps_per_unit)


def _table_for(x, table: DickmanTable | None, extend: bool) -> DickmanTable:
    table = table or dickman_table()
    top = float(np.max(x)) if np.size(x) else 0.0
    if top > table.x_max:
        if not extend:
            raise DomainError(f"x = {top} beyond table range {table.x_max}")
        steps = int(round(1 / table.h))
        table = dickman_table(max(2 * table.x_max, int(math.ceil(top)) + 1), steps)
    return table


def dickman_rho(x, table: DickmanTable | None = None, extend: bool = True):
    """Dickman function rho(x) for x >= 0 (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("rho(x) needs x >= 0")
    out = _table_for(x, table, extend)(x)
    return float(out) if out.ndim == 0 else out


def dickman_density(x, table: DickmanTable | None = None, extend: bool = True):
    """Density rho(x - 1)/x of the limit law on (1, inf), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    shifted = np.clip(x - 1, 0, None)
    tab = _table_for(shifted, table, extend)
    out = np.where(x > 1, tab(shifted) / np.where(x > 1, x, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def dickman_cdf(x, table: DickmanTable | None = None, extend: bool = True):
    """CDF 1 - rho(x) of the limit law of tau_n / log n."""
    x = np.clip(np.asarray(x, dtype=float), 0, None)
    out = 1.0 - _table_for(x, table, extend)(x)
    return float(out) if out.ndim == 0 else out


# --- exponential integrals ----------------------------------------------------


def expint_Ei(s) -> float:
    """Ei(s) = gamma + log|s| + sum_{m>=1} s^m / (m m!), principal value for s > 0.

    The series cancels badly for s << 0, so it is summed with enough extra
    bits to absorb terms of size e^|s|.
    """
    s = float(s)
    if s == 0:
        raise DomainError("Ei has a logarithmic pole at 0")
    if not math.isfinite(s):
        raise DomainError("Ei needs a finite argument")
    ctx = _series_ctx(int(abs(s) * 1.4427) + 80)
    x = ctx.mpf(s)
    eps = ctx.eps
    term = ctx.one
    acc = ctx.zero
    m = 0
    while True:
        m += 1
        term = term * x / m
        contrib = term / m
        acc += contrib
        if m > abs(s) and abs(contrib) <= eps * abs(acc):
            break
    return float(ctx.euler + ctx.log(abs(x)) + acc)


@lru_cache(maxsize=32)
def _series_ctx(prec: int):
    ctx = mpmath.MPContext()
    ctx.prec = prec
    return ctx


def expint_E1(z) -> float:
    """E1(z) = int_z^inf e^-t / t dt = -Ei(-z) for z > 0."""
    z = float(z)
    if not z > 0:
        raise DomainError("E1 needs z > 0")
    return -expint_Ei(-z)


def limit_mgf(s) -> float:
    """E exp(s xi) for the limit xi of tau_n / log n.

    Equals 1 + s exp(gamma + sum_m s^m/(m m!)) = 1 + sign(s) exp(Ei(s)) and
    is 1 at s = 0. Restricted to s < 1, where the finite-n MGFs exist.
    """
    s = float(s)
    if s >= 1:
        raise DomainError("limit_mgf is provided for s < 1")
    if s == 0:
        return 1.0
    return 1.0 + math.copysign(math.exp(expint_Ei(s)), s)


# --- GD(1) ------------------------------------------------------------------


@dataclass(frozen=True)
class GD1Spec:
    """Truncation threshold for the product series and the CDF normalizer."""

    eps: float = 1e-9
    normalizer: float = math.exp(-EULER_GAMMA)

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise DomainError("eps must lie in (0, 1)")


def gd1_cdf(x, table: DickmanTable | None = None, extend: bool = True):
    """P(GD(1) <= x) = e^-gamma int_0^x rho(u) du."""
    x = np.clip(np.asarray(x, dtype=float), 0, None)
    tab = _table_for(x, table, extend)
    out = np.minimum(math.exp(-EULER_GAMMA) * tab.integral(x), 1.0)
    return float(out) if out.ndim == 0 else out


def gd1_sample(rng: RngLike, eps: float = 1e-9, size: int | None = None):
    """Draws of U1 + U1 U2 + U1 U2 U3 + ..., truncated once the product < eps.

    The term that first drops below eps is still added, so the truncation
    bias is at most 2 eps on average.
    """
    spec = GD1Spec(eps)
    gen = _gen(rng)
    n = 1 if size is None else int(size)
    prod = np.ones(n)
    total = np.zeros(n)
    active = np.arange(n)
    while active.size:
        prod[active] *= gen.random(active.size)
        total[active] += prod[active]
        active = active[prod[active] >= spec.eps]
    return float(total[0]) if size is None else total
