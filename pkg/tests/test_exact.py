import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from forestfire import exact
from forestfire.errors import BudgetError, DomainError, PrecisionError

from _oracles import nested_harmonic_bruteforce

GAMMA = 0.5772156649015329


def rel(a, b):
    if isinstance(b, Fraction):
        return abs(float(a * b.denominator / b.numerator - 1))
    return abs(float(a / b - 1))


@pytest.mark.parametrize("n,t,expected", [(0, 0.5, Fraction(1)), (1, 0.5, Fraction(3)), (2, 0.5, Fraction(27, 5))])
def test_u_small_orders(n, t, expected):
    assert rel(exact.u_recursive(n, t), expected) <= 1e-30
    assert rel(exact.eval_factored(exact.u_factored(n), t), expected) <= 1e-30


def test_factored_exponents():
    assert exact.u_factored(1).exponents == {1: -2, 2: 1}
    assert exact.u_factored(2).exponents == {1: -3, 2: 3, 3: -1}
    for n in range(12):
        assert sum(exact.u_factored(n).exponents.values()) == -1


def test_factored_validation():
    with pytest.raises(ValueError):
        exact.FactoredMGF(1, {1: -2, 2: 2})
    with pytest.raises(DomainError):
        exact.u_factored(-1)


def test_recursion_matches_closed_form_n30():
    assert rel(exact.eval_factored(exact.u_factored(30), -0.5), exact.u_recursive(30, -0.5)) <= 1e-12


@given(n=st.integers(0, 30), t=st.floats(-3, 0.9, allow_nan=False).filter(lambda x: abs(x) > 1e-6))
@settings(max_examples=60, deadline=None)
def test_recursion_matches_closed_form_random(n, t):
    assert rel(exact.eval_factored(exact.u_factored(n), t), exact.u_recursive(n, t)) <= 1e-12


def test_domain_errors_at_poles():
    with pytest.raises(DomainError):
        exact.u_recursive(2, 1.0)
    with pytest.raises(DomainError):
        exact.eval_factored(exact.u_factored(3), 1.5)
    with pytest.raises(DomainError):
        exact.u_recursive(3, 2.0)
    assert exact.eval_factored(exact.u_factored(4), 0) == 0
    assert exact.u_recursive(4, 0) == 0


def test_mgf_routes_agree():
    for n in (0, 1, 5, 100):
        for t in (-2.0, -0.5, 0.3, 0.9):
            assert rel(exact.mgf(n, t, "integral"), exact.mgf(n, t, "factored")) <= 1e-25
    assert exact.mgf(7, 0) == 1
    with pytest.raises(ValueError):
        exact.mgf(1, 0.5, "bogus")


@pytest.mark.parametrize("n,mu,var", [(0, 1, 1), (1, 2, 2), (2, Fraction(8, 3), Fraction(8, 3))])
def test_moment_table(n, mu, var):
    assert rel(exact.mean_tau(n), Fraction(mu)) <= 1e-12
    assert rel(exact.variance_tau(n), Fraction(var)) <= 1e-12
    assert exact.mean_tau_exact(n) == mu


def test_second_moments():
    assert rel(exact.second_moment_tau(0), Fraction(2)) <= 1e-30
    assert rel(exact.second_moment_tau(1), Fraction(6)) <= 1e-30
    assert rel(exact.second_moment_tau(2), Fraction(88, 9)) <= 1e-30


def test_mean_matches_small_t_slope():
    ctx = mpmath.MPContext()
    ctx.prec = 200
    t = ctx.mpf("1e-40")
    for n in range(21):
        slope = exact.eval_factored(exact.u_factored(n), t, prec=200) / t
        assert rel(slope, exact.mean_tau(n)) <= 1e-10


def test_exact_mean_budget():
    with pytest.raises(BudgetError):
        exact.mean_tau_exact(exact.EXACT_MEAN_N_MAX + 1)


def test_precision_budget_is_explicit():
    with pytest.raises(PrecisionError):
        exact.mean_tau(500, max_precision=256)


def test_A_small():
    ctx = mpmath.MPContext()
    ctx.prec = 200
    assert rel(exact.A(1), ctx.log(2)) <= 1e-30
    assert rel(exact.A(2), ctx.log(ctx.mpf(8) / 3)) <= 1e-30
    assert rel(exact.A(1, "alternating"), ctx.log(2)) <= 1e-30
    with pytest.raises(DomainError):
        exact.A(0)


def test_A_methods_agree_n200():
    assert abs(exact.A(200, "alternating") - exact.A(200, "integral")) <= 1e-20


def test_exp_A_is_mean():
    for n in range(1, 51):
        assert rel(mpmath.exp(exact.A(n, "integral")), exact.mean_tau(n)) <= 1e-10


def test_A_limit_gap_pinned_and_decreasing():
    pinned = {
        10**3: 0.64407511553779978218,
        10**4: 0.62998194662524298161,
        10**5: 0.62082772620928607809,
    }
    vals = [float(exact.A_limit_gap(n)) for n in sorted(pinned)]
    for v, n in zip(vals, sorted(pinned)):
        assert abs(v - pinned[n]) <= 1e-15
    assert vals[0] > vals[1] > vals[2] > GAMMA
    g3 = float(exact.A_limit_gap(3))
    assert math.isfinite(g3) and g3 > GAMMA
    with pytest.raises(DomainError):
        exact.A_limit_gap(2)


def test_mean_over_log_decreases_toward_gamma():
    gaps = [float(mpmath.log(mpmath.exp(exact.A(n, "integral")) / mpmath.log(n))) for n in (100, 1000, 10**4)]
    assert gaps[0] > gaps[1] > gaps[2] > GAMMA


def test_a_is_harmonic_for_m1():
    for n in range(1, 21):
        assert exact.a(n, 1, "alternating") == exact.harmonic(n)
        assert exact.a(n, 1, "nested") == exact.harmonic(n)


def test_a_small_instance():
    assert exact.a(3, 2, "alternating") == exact.a(3, 2, "nested") == Fraction(85, 36)
    assert exact.a(5, 3) == nested_harmonic_bruteforce(5, 3)


@given(n=st.integers(1, 25), m=st.integers(1, 5))
@settings(max_examples=50, deadline=None)
def test_a_routes_agree_and_positive(n, m):
    alt = exact.a(n, m, "alternating")
    assert alt == exact.a(n, m, "nested")
    assert alt > 0
    assert abs(exact.a(n, m, "nested", exact=False) - float(alt)) <= 1e-12 * float(alt)


@pytest.mark.parametrize("n", [1, 10, 100, 1000])
def test_a_bound(n):
    for m in range(1, 6):
        assert exact.a(n, m, "nested", exact=False) <= (math.log(n) + 1) ** m


def test_a_asymptotic_ratio():
    for m in (1, 2, 3):
        r6 = exact.a(10**6, m, "nested", exact=False) * math.factorial(m) / math.log(10**6) ** m
        r3 = exact.a(10**3, m, "nested", exact=False) * math.factorial(m) / math.log(10**3) ** m
        assert 0.9 <= r6 <= 1.5
        assert abs(r6 - 1) < abs(r3 - 1)
    ratio = exact.a(10**6, 3, "nested", exact=False) / float(exact.a(10**6, 3, "asymptotic"))
    assert abs(ratio - 1) < 0.1


def test_a_budget_and_domain():
    with pytest.raises(BudgetError):
        exact.a(exact.EXACT_N_MAX + 1, 2, "alternating")
    with pytest.raises(BudgetError):
        exact.a(5, exact.EXACT_M_MAX + 1)
    with pytest.raises(DomainError):
        exact.a(0, 1)
    with pytest.raises(ValueError):
        exact.a(3, 2, "bogus")


def test_harmonic_values():
    assert exact.harmonic(3) == Fraction(11, 6)
    assert abs(float(exact.harmonic(1000)) - float(exact.harmonic_asymptotic(1000))) <= 1e-6
    assert abs(float(exact.harmonic(1000, 2)) - float(exact.harmonic_asymptotic(1000, 2))) <= 1e-6
    assert abs(float(exact.zeta_value(2)) - math.pi ** 2 / 6) <= 1e-15
    assert abs(float(exact.euler_gamma()) - GAMMA) <= 1e-16
