import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import lambertw

from forestfire import GraphSpec, RngHandle
from forestfire.errors import DomainError, EmptyRequestError
from forestfire.tailbound import (
    TailBoundParams,
    chernoff_exponent,
    estimate_theta,
    lambert_w0,
    log_tail_bound,
    phi_nu,
    solve_lambda,
    t_max,
    tail_bound,
)


def bisect_root(f, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def w0_oracle(x):
    # floats a rounding error below -1/e are clamped to the branch point,
    # where W is -1; the real part of the complex value is that limit
    with mpmath.workdps(50):
        return float(mpmath.re(mpmath.lambertw(mpmath.mpf(x))))


@given(st.floats(-1 / math.e, 1e6))
@settings(max_examples=300, deadline=None)
def test_lambert_w0_against_high_precision(x):
    assert lambert_w0(x) == pytest.approx(w0_oracle(x), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("x", [-0.3678794411714423, -0.36787944117, -0.3678, -0.3, -0.25, 0.5, 50.0])
def test_lambert_w0_near_branch(x):
    assert lambert_w0(x) == pytest.approx(w0_oracle(x), rel=1e-14, abs=1e-15)
    if x > -0.36:
        assert lambert_w0(x) == pytest.approx(lambertw(x).real, rel=1e-13)


def test_lambert_w0_edges():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(-1 / math.e) == -1.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        lambert_w0(-0.5)


def test_t_max_values():
    assert t_max(0.5) == 1.0
    assert t_max(1.0) == 1.0
    tm = t_max(2.0)
    assert tm == pytest.approx(0.20319, abs=1e-5)
    assert abs(tm * math.exp(2.0 * (1 - tm)) - 1) <= 1e-10
    assert t_max(3.0) <= 1 / 3
    with pytest.raises(DomainError):
        t_max(0.0)


@pytest.mark.parametrize("S", [1.1, 2.0, 5.0, 10.0])
def test_t_max_matches_bisection(S):
    oracle = bisect_root(lambda t: t * math.exp(S * (1 - t)) - 1, 1e-300, 1 / S)
    assert abs(t_max(S) - oracle) <= 1e-10


@pytest.mark.parametrize("S", [0.5, 1.0, 2.0, 4.0])
def test_solve_lambda_residual_grid(S):
    for g in np.arange(1, 10) / 10:
        lam = solve_lambda(g, S)
        assert 0 < lam < t_max(S)
        assert abs(g * phi_nu(lam, S) - 1) <= 1e-12


def test_solve_lambda_examples():
    oracle = bisect_root(lambda t: t * math.exp(1 - t) - 0.5, 0.0, 1.0)
    assert solve_lambda(0.5, 1.0) == pytest.approx(oracle, abs=1e-12)
    assert solve_lambda(0.5, 1.0) == pytest.approx(0.232, abs=1e-3)
    assert solve_lambda(0.999, 1.0) < 1e-2
    assert solve_lambda(0.3, 1.0) > solve_lambda(0.7, 1.0)
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError):
            solve_lambda(bad, 1.0)


@pytest.mark.parametrize("S", [0.5, 2.0, 6.0])
def test_phi_increasing(S):
    tm = t_max(S)
    ts = np.linspace(0, tm, 102)[1:-1]
    vals = np.array([phi_nu(t, S) for t in ts])
    assert np.all(np.diff(vals) > 0)
    assert phi_nu(0.0, S) == 1.0
    with pytest.raises(DomainError):
        phi_nu(tm, S)


def test_params_derivation():
    prm = TailBoundParams(0.8, math.sqrt(0.8 * 0.5))
    assert prm.gamma == pytest.approx(0.5)
    assert prm.S == pytest.approx(-math.log(0.2))
    assert prm.lam == solve_lambda(prm.gamma, prm.S)
    assert TailBoundParams.from_gamma(0.8, 0.5).gamma == pytest.approx(0.5)
    with pytest.raises(DomainError):
        TailBoundParams(0.5, 0.8)  # theta^2 > p
    with pytest.raises(DomainError):
        TailBoundParams(1.0, 0.5)


def test_tail_bound_shape():
    prm = TailBoundParams.from_gamma(0.8, 0.5)
    assert tail_bound(1e3, prm) < 1e-20
    assert tail_bound(1e-9, prm) == 1.0
    assert tail_bound(1e-9, prm, clamp=False) == pytest.approx(1 / prm.gamma, rel=1e-6)
    slope = (log_tail_bound(100.0, prm) - log_tail_bound(50.0, prm)) / 50
    prefactor = (math.log1p(0.2 * 100) - math.log1p(0.2 * 50)) / 50
    assert slope == pytest.approx(-prm.lam + prefactor, abs=1e-14)
    with pytest.raises(DomainError):
        tail_bound(0.0, prm)


def test_log_slope_is_lambda_when_prefactor_is_small():
    prm = TailBoundParams.from_gamma(0.3, 0.1)
    slope = (log_tail_bound(100.0, prm) - log_tail_bound(50.0, prm)) / 50
    assert abs(slope / -prm.lam - 1) <= 0.02


def test_chernoff_debug_route():
    lam = solve_lambda(0.5, 1.0)
    assert abs(chernoff_exponent(100.0, 0.5, 1.0) / (-lam * 100) - 1) <= 0.01


def test_theta_estimates():
    g = GraphSpec.torus(64)
    assert estimate_theta(g, 1.0, 5, RngHandle(1)).value == 1.0
    assert estimate_theta(g, 0.05, 50, RngHandle(1)).value == 0.0
    ests = [estimate_theta(g, p, 300, RngHandle(2)) for p in (0.65, 0.75, 0.85)]
    for lo, hi in zip(ests, ests[1:]):
        assert hi.value >= lo.value - 2 * math.hypot(lo.stderr, hi.stderr)
    with pytest.raises(EmptyRequestError):
        estimate_theta(g, 0.5, 0, RngHandle(1))


def test_theta_on_plain_graph_uses_largest_cluster_only():
    g = GraphSpec.path(5)
    assert estimate_theta(g, 1.0, 3, RngHandle(3)).value == 1.0
