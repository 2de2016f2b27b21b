"""Exact and high-precision moments of the inter-burnout times tau_n.

The MGF of tau_n is 1 + u_n(t) with

    u_n(t) = t * prod_{k=1}^{n+1} (k - t) ** ((-1)**k * C(n+1, k)),

a mixture of Gamma laws. Everything here revolves around alternating
binomial sums, which lose about n bits to cancellation; those routes run at
n + 64 bits. The routes that avoid cancellation (the integral for A_n, the
nested sum for a(n, m)) run at a fixed 128 bits.

Working precision is passed per call and every call builds its values in a
private mpmath context, so nothing here touches global state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict

import mpmath
import numpy as np

from .errors import BudgetError, DomainError, PrecisionError, QuadratureError

GUARD_BITS = 64
FIXED_PRECISION = 128
MAX_PRECISION = 1 << 18
# exact rational routes refuse anything larger than this
EXACT_N_MAX = 60
EXACT_M_MAX = 8
EXACT_MEAN_N_MAX = 16


@lru_cache(maxsize=64)
def _ctx(prec: int) -> mpmath.ctx_mp.MPContext:
    # contexts are never mutated after creation, so sharing them is safe
    ctx = mpmath.MPContext()
    ctx.prec = prec
    return ctx


def _check_prec(prec: int, max_precision: int) -> int:
    if prec > max_precision:
        raise PrecisionError(f"needs {prec} bits, above the {max_precision}-bit budget")
    return prec


def alternating_precision(n: int) -> int:
    """Bits for an alternating binomial sum of order n.

    The terms reach about 2^n * log n, so n + log2(n) bits are lost before
    GUARD_BITS of the result survive; another 32 bits keep rounding of the
    final value below 2^-96.
    """
    return n + n.bit_length() + GUARD_BITS + 32


@lru_cache(maxsize=None)
def euler_gamma(prec: int = 512):
    """Euler's constant, computed once per precision."""
    return _ctx(prec).euler


@lru_cache(maxsize=None)
def zeta_value(m: int, prec: int = 512):
    if m < 2:
        raise DomainError("zeta(m) needs m >= 2")
    return _ctx(prec).zeta(m)


# --- u_n(t) -----------------------------------------------------------------


def u_recursive(n: int, t, prec: int | None = None):
    """u_n(t) from u_0(t) = t/(1-t) and u_{k+1}(t) = -u_k(t) / u_k(t-1).

    Level k needs u_k at t, t-1, ..., t-(n-k), so the work is O(n^2).
    """
    if n < 0:
        raise DomainError("order must be nonnegative")
    prec = prec or alternating_precision(n) + 32
    ctx = _ctx(prec)
    t = ctx.mpf(t)
    if t >= 1:
        raise DomainError(f"u_n(t) needs t < 1, got {t}")
    vals = []
    for j in range(n + 1):
        s = t - j
        vals.append(s / (1 - s))
    for k in range(n):
        nxt = []
        for j in range(n - k):
            if vals[j + 1] == 0:
                raise DomainError(f"pole of u_{k + 1} at t - {j} = {t - j}")
            nxt.append(-vals[j] / vals[j + 1])
        vals = nxt
    return vals[0]


@dataclass(frozen=True)
class FactoredMGF:
    """u_n(t) = t * prod_k (k - t) ** exponents[k]."""

    n: int
    exponents: Dict[int, int]

    def __post_init__(self):
        for k, e in self.exponents.items():
            if e != (-1) ** k * comb(self.n + 1, k):
                raise ValueError(f"exponent of (k - t) at k={k} is not (-1)^k C(n+1, k)")
        if sum(self.exponents.values()) != -1:
            raise ValueError("exponents must sum to -1")


def u_factored(n: int) -> FactoredMGF:
    if n < 0:
        raise DomainError("order must be nonnegative")
    return FactoredMGF(n, {k: (-1) ** k * comb(n + 1, k) for k in range(1, n + 2)})


def eval_factored(f: FactoredMGF, t, prec: int | None = None,
                  max_precision: int = MAX_PRECISION):
    """Evaluate u_n(t) in log space; only exponentiated at the very end."""
    prec = _check_prec(prec or alternating_precision(f.n) + 32, max_precision)
    ctx = _ctx(prec)
    t = ctx.mpf(t)
    if t >= 1:
        raise DomainError(f"u_n(t) needs t < 1, got {t}")
    if t == 0:
        return ctx.zero
    acc = ctx.log(abs(t))
    for k, e in f.exponents.items():
        acc += e * ctx.log(k - t)
    v = ctx.exp(acc)
    return v if t > 0 else -v


def mgf(n: int, t, method: str = "factored", prec: int | None = None,
        max_precision: int = MAX_PRECISION):
    """E exp(t tau_n) for t < 1.

    ``"factored"`` evaluates the product form at n + O(1) guard bits;
    ``"integral"`` goes through :func:`log_u_over_t` at 128 bits.
    """
    if method == "factored":
        return 1 + eval_factored(u_factored(n), t, prec, max_precision)
    if method == "integral":
        ctx = _ctx((prec or FIXED_PRECISION) + 24)
        t = ctx.mpf(t)
        if t == 0:
            return ctx.one
        return 1 + t * ctx.exp(log_u_over_t(n, t, prec))
    raise ValueError(f"unknown method {method!r}")


# --- moments ----------------------------------------------------------------


def mean_tau(n: int, prec: int | None = None, max_precision: int = MAX_PRECISION):
    """E tau_n = exp(sum_{i=1}^{n+1} C(n+1, i) (-1)^i log i)."""
    if n < 0:
        raise DomainError("order must be nonnegative")
    return _ctx(_check_prec(prec or alternating_precision(n), max_precision)).exp(
        _alternating_log_sum(n, prec, max_precision))


def _alternating_log_sum(n: int, prec: int | None, max_precision: int):
    prec = _check_prec(max(prec or 0, alternating_precision(n)), max_precision)
    ctx = _ctx(prec)
    acc = ctx.zero
    N = n + 1
    for i in range(2, N + 1):
        c = comb(N, i)
        acc += (c if i % 2 == 0 else -c) * ctx.log(i)
    return acc


def mean_tau_exact(n: int) -> Fraction:
    """E tau_n as a reduced fraction, prod_k k ** ((-1)^k C(n+1, k))."""
    if not 0 <= n <= EXACT_MEAN_N_MAX:
        raise BudgetError(f"exact mean limited to n <= {EXACT_MEAN_N_MAX}")
    num, den = 1, 1
    for k in range(2, n + 2):
        e = (-1) ** k * comb(n + 1, k)
        if e > 0:
            num *= k ** e
        else:
            den *= k ** (-e)
    return Fraction(num, den)


def second_moment_tau(n: int, prec: int | None = None, max_precision: int = MAX_PRECISION):
    """E tau_n^2 = 2 * E tau_n * a(n+1, 1), with a(n+1, 1) = H_{n+1}.

    a(n+1, 1) is the alternating sum sum_i C(n+1, i) (-1)^(i+1) / i, taken
    exactly, whose sign makes the second moment positive.
    """
    mu = mean_tau(n, prec, max_precision)
    ctx = _ctx(max(prec or 0, alternating_precision(n)))
    h = a(n + 1, 1, "alternating") if n + 1 <= EXACT_N_MAX else harmonic(n + 1)
    return 2 * mu * ctx.mpf(h.numerator) / h.denominator


def variance_tau(n: int, prec: int | None = None):
    mu = mean_tau(n, prec)
    return second_moment_tau(n, prec) - mu * mu


# --- A_n --------------------------------------------------------------------


def A(n: int, method: str = "integral", prec: int | None = None,
      max_precision: int = MAX_PRECISION, tol=None):
    """A_n = sum_{i=1}^{n+1} C(n+1, i) (-1)^i log i, so that E tau_n = exp(A_n).

    ``"alternating"`` sums the series at n + 64 bits. ``"integral"`` uses

        A_n = int_0^1 (1 - prod_{k<=n} (1 + x/k)^-1) / x dx

    at a fixed 128 bits (or `prec`), whatever n is.
    """
    if n < 1:
        raise DomainError("A_n needs n >= 1")
    if method == "alternating":
        return _alternating_log_sum(n, prec, max_precision)
    if method == "integral":
        return _A_integral(n, prec or FIXED_PRECISION, tol)
    raise ValueError(f"unknown method {method!r}")


class _LogRising:
    """L(x) = sum_{k=1}^n log(1 + x/k) for x > -1, at working precision.

    For |x| <= 1/4 the power series sum_m (-1)^(m-1) H_{n,m} x^m / m keeps
    full relative accuracy near 0; elsewhere a log-gamma difference is used.
    """

    split = 0.25

    def __init__(self, ctx, n: int):
        self.ctx = ctx
        self.n = n
        terms = (ctx.prec + 10) // 2 + 2
        self.harmonic1 = _harmonic_mp(ctx, n, 1)
        coeffs = [ctx.zero, self.harmonic1] + [
            (1 if m % 2 else -1) * _harmonic_mp(ctx, n, m) / m for m in range(2, terms + 1)
        ]
        coeffs.reverse()
        self.coeffs = coeffs
        self.lg_n1 = ctx.loggamma(n + 1)

    def __call__(self, x):
        ctx = self.ctx
        if abs(x) <= self.split:
            return ctx.polyval(self.coeffs, x)
        return ctx.loggamma(self.n + 1 + x) - self.lg_n1 - ctx.loggamma(1 + x)


def _quad_checked(ctx, f, points, prec: int, tol, what: str):
    val, err = ctx.quad(f, points, error=True)
    tol = ctx.mpf(tol) if tol is not None else ctx.mpf(2) ** (-(prec - 8))
    if err > tol:
        raise QuadratureError(f"{what} did not converge", val, err)
    return val


def _A_integral(n: int, prec: int, tol=None):
    ctx = _ctx(prec + 24)
    L = _LogRising(ctx, n)

    def integrand(x):
        if x == 0:
            return L.harmonic1
        return -ctx.expm1(-L(x)) / x

    return _quad_checked(ctx, integrand, [0, ctx.mpf(L.split), 1], prec, tol, f"A_{n} integral")


def log_u_over_t(n: int, t, prec: int | None = None, tol=None):
    """log(u_n(t) / t) without alternating sums.

    Since d/dt log u_n(t) = 1 / (t prod_{k=1}^{n+1} (1 - t/k)),

        log(u_n(t)/t) = A_n + int_0^t (1/prod_k (1 - s/k) - 1) / s ds,

    with A_n from its own integral (A_0 = 0). Valid for t < 1.
    """
    prec = prec or FIXED_PRECISION
    ctx = _ctx(prec + 24)
    t = ctx.mpf(t)
    if t >= 1:
        raise DomainError(f"u_n(t) needs t < 1, got {t}")
    base = _A_integral(n, prec, tol) if n >= 1 else ctx.zero
    if t == 0:
        return base
    L = _LogRising(ctx, n + 1)

    def integrand(s):
        if s == 0:
            return L.harmonic1
        return ctx.expm1(-L(-s)) / s

    pts = [0, t]
    if abs(t) > L.split:
        pts = [0, ctx.mpf(L.split) * ctx.sign(t), t]
    return base + _quad_checked(ctx, integrand, pts, prec, tol, f"log u_{n}({t})/t")


def _harmonic_mp(ctx, n: int, m: int):
    if n <= 64:
        return ctx.fsum(ctx.mpf(1) / ctx.mpf(k) ** m for k in range(1, n + 1))
    if m == 1:
        return ctx.digamma(n + 1) + ctx.euler
    return ctx.zeta(m) - ctx.zeta(m, n + 1)


def A_limit_gap(n: int, prec: int | None = None):
    """A_n - log log n, which tends to Euler's constant."""
    if n < 3:
        raise DomainError("A_limit_gap needs n >= 3")
    ctx = _ctx(prec or FIXED_PRECISION)
    return A(n, "integral", prec) - ctx.log(ctx.log(n))


# --- a(n, m) and harmonic numbers --------------------------------------------


def a(n: int, m: int, method: str = "nested", exact: bool = True,
      prec: int | None = None):
    """a(n, m) = sum_{k=1}^n C(n, k) (-1)^(k+1) / k^m.

    ``"alternating"`` sums the definition in exact rationals. ``"nested"``
    uses a(j, m) = sum_{i<=j} a(i, m-1) / i with a(j, 0) = 1, which equals
    the sum over 1 <= i_1 <= ... <= i_m <= n of 1/(i_1 ... i_m); it is exact
    when `exact` is true and otherwise runs in floating point for any n.
    ``"asymptotic"`` returns log^m n / m! + gamma log^(m-1) n / (m-1)!.
    """
    if n < 1 or m < 1:
        raise DomainError("a(n, m) needs n >= 1 and m >= 1")
    if method == "asymptotic":
        ctx = _ctx(prec or FIXED_PRECISION)
        L = ctx.log(n)
        return L ** m / ctx.factorial(m) + ctx.euler * L ** (m - 1) / ctx.factorial(m - 1)
    if method == "nested" and not exact:
        return float(_nested_float(n, m)[-1])
    if n > EXACT_N_MAX or m > EXACT_M_MAX:
        raise BudgetError(f"exact a(n, m) limited to n <= {EXACT_N_MAX}, m <= {EXACT_M_MAX}")
    if method == "alternating":
        return sum((Fraction(comb(n, k), k ** m) if k % 2 else Fraction(-comb(n, k), k ** m)
                    for k in range(1, n + 1)), Fraction(0))
    if method == "nested":
        return _nested_exact(n, m)[-1]
    raise ValueError(f"unknown method {method!r}")


def _nested_exact(n: int, m: int):
    row = [Fraction(1)] * n
    for _ in range(m):
        acc = Fraction(0)
        new = []
        for i, v in enumerate(row, start=1):
            acc += v / i
            new.append(acc)
        row = new
    return row


def _nested_float(n: int, m: int) -> np.ndarray:
    inv = 1.0 / np.arange(1, n + 1, dtype=float)
    row = np.ones(n)
    for _ in range(m):
        row = np.cumsum(row * inv)
    return row


def harmonic(n: int, m: int = 1) -> Fraction:
    """H_{n,m} = sum_{k=1}^n k^-m exactly."""
    if n < 1 or m < 1:
        raise DomainError("harmonic needs n >= 1 and m >= 1")
    return _harmonic_exact(n, m)


@lru_cache(maxsize=256)
def _harmonic_exact(n: int, m: int) -> Fraction:
    # common-denominator accumulation keeps this fast for n in the thousands
    den = math.lcm(*range(1, n + 1)) ** m
    num = sum(den // k ** m for k in range(1, n + 1))
    return Fraction(num, den)


def harmonic_asymptotic(n: int, m: int = 1, prec: int | None = None):
    """gamma + log n + 1/(2n) for m = 1; zeta(m) - 1/((m-1) n^(m-1)) for m >= 2."""
    if n < 1 or m < 1:
        raise DomainError("harmonic_asymptotic needs n >= 1 and m >= 1")
    ctx = _ctx(prec or FIXED_PRECISION)
    if m == 1:
        return ctx.mpf(euler_gamma()) + ctx.log(n) + ctx.mpf(1) / (2 * n)
    return ctx.mpf(zeta_value(m)) - ctx.mpf(1) / ((m - 1) * ctx.mpf(n) ** (m - 1))
