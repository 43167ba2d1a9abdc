import math
from fractions import Fraction as F

import pytest
from conftest import log_series, nonzero_rationals, tangential_polys
from hypothesis import assume, given
from hypothesis import strategies as st

from polyhom.errors import DimensionMismatch, MathDomainError, ModeMismatch
from polyhom.series import (
    LogCaps, LogSeries, TaylorData, antideriv_monomial, collapse, compose_analytic, lambda_apply,
    series_ddt, series_from_json, series_mul, series_to_json, two_var_lift, weighted_antideriv,
)
from polyhom.singular_ode import euler_apply, normal_form
from polyhom.tangential import TangentialPoly


def S(terms, K=6, dim=0, W=None):
    return LogSeries(dim, K, terms, W)


# --- products --------------------------------------------------------------

def test_difference_of_squares():
    assert series_mul(S({(0, 0): 1, (1, 0): 1}), S({(0, 0): 1, (1, 0): -1})).same_terms(S({(0, 0): 1, (2, 0): -1}))


def test_log_monomial_square():
    a = S({(1, 1): 1})
    assert (a * a).same_terms(S({(2, 2): 1}))


def test_square_of_one_plus_tlogt():
    a = S({(0, 0): 1, (1, 1): 1})
    brute = {}
    for k1, c1 in a.items():
        for k2, c2 in a.items():
            key = (k1[0] + k2[0], k1[1] + k2[1])
            brute[key] = brute.get(key, 0) + c1.constant_term() * c2.constant_term()
    assert (a * a).same_terms(S(brute))
    assert (a * a).same_terms(S({(0, 0): 1, (1, 1): 2, (2, 2): 1}))


def test_product_truncation_uses_valuations():
    a = S({(2, 0): 1}, K=5)
    b = S({(3, 0): 1}, K=8)
    prod = series_mul(a, b)
    assert prod.K == min(5 + 3, 8 + 2)
    assert prod.same_terms(S({(5, 0): 1}, K=8))


def test_mode_and_dimension_mismatch():
    exact = S({(1, 0): 1})
    with pytest.raises(ModeMismatch):
        exact + exact.to_float()
    with pytest.raises(DimensionMismatch):
        exact * S({(1, 0): 1}, dim=1)


def test_bare_logs_rejected():
    with pytest.raises(MathDomainError):
        S({(0, 1): 1})


@given(log_series(), log_series(), log_series())
def test_ring_laws(a, b, c):
    assert (a * b).same_terms(b * a)
    assert ((a * b) * c).truncate(6).same_terms((a * (b * c)).truncate(6))
    lhs = (a * (b + c)).truncate(6)
    rhs = (a * b + a * c).truncate(6)
    assert lhs.truncate(min(lhs.K, rhs.K)).same_terms(rhs.truncate(min(lhs.K, rhs.K)))


@given(log_series(dim=2, K=4, W=6), log_series(dim=2, K=4, W=6))
def test_product_commutes_with_tangential_terms(a, b):
    assert (a * b).same_terms(b * a)


@given(log_series(K=5, min_power=1), log_series(K=5, min_power=1), st.sampled_from([0.3, 0.1, 0.03]))
def test_product_matches_float_evaluation(a, b, t):
    # the product is complete when both factors are exact polynomials in t and log t
    a = LogSeries(0, 12, dict(a.coeffs))
    b = LogSeries(0, 12, dict(b.coeffs))
    prod = a * b
    want = a.evaluate(t) * b.evaluate(t)
    assert math.isclose(prod.evaluate(t), want, rel_tol=1e-9, abs_tol=1e-12)


# --- derivative -----------------------------------------------------------

def test_ddt_examples():
    assert S({(2, 1): 1}).ddt().same_terms(S({(1, 1): 2, (1, 0): 1}))
    assert S({(3, 0): 1}).ddt().same_terms(S({(2, 0): 3}))
    d = S({(4, 2): 1}).ddt()
    assert d.same_terms(S({(3, 2): 4, (3, 1): 2}))
    f = lambda t: t**4 * math.log(t) ** 2
    h = 1e-5
    numeric = (f(0.1 + h) - f(0.1 - h)) / (2 * h)
    assert abs(d.evaluate(0.1) - numeric) < 1e-10


def test_ddt_drops_order_and_rejects_bare_log():
    assert S({(3, 0): 1}, K=6).ddt().K == 5
    with pytest.raises(MathDomainError):
        S({(1, 1): 1}).ddt()


@given(log_series(min_power=1, differentiable=True), log_series(min_power=1, differentiable=True))
def test_leibniz(a, b):
    lhs = (a * b).ddt()
    rhs = a.ddt() * b + a * b.ddt()
    k = min(lhs.K, rhs.K)
    assert lhs.truncate(k).same_terms(rhs.truncate(k))


# --- antiderivative ---------------------------------------------------------

def test_antiderivative_examples():
    assert weighted_antideriv(S({(3, 0): 1}), 0).same_terms(S({(5, 0): F(1, 5)}, K=8))
    assert weighted_antideriv(S({(1, 0): 1}), 3).same_terms(S({(3, 1): 1}, K=8))
    mu = 5
    assert weighted_antideriv(S({(mu - 2, 1): 1}), mu).same_terms(S({(mu, 2): F(1, 2)}, K=8))


def test_antiderivative_rejects_non_integrable():
    with pytest.raises(MathDomainError):
        antideriv_monomial(1, 0, 5)
    assert antideriv_monomial(1, 0, 5, regularized=True) == [(3, 0, F(-1, 2))]


@given(st.integers(2, 9), st.integers(0, 3), st.integers(3, 7), st.integers(-3, 0))
def test_antiderivative_inverts_the_operator(m, j, mu, m_low):
    """The Euler operator with roots (m_low, mu) maps the difference of two antiderivatives back to t^m log^j."""
    assume(m + 1 - mu >= -1)
    p, q = normal_form(m_low, mu)
    f = S({(m, j): 1}, K=12)
    hi = weighted_antideriv(f, mu)
    lo = weighted_antideriv(f, m_low, regularized=True)
    w = (hi - lo).scale(F(1, mu - m_low))
    assert euler_apply(w, p, q).same_terms(S({(m + 2, j): 1}, K=14))


@given(st.integers(0, 9), st.integers(0, 3), st.integers(0, 8))
def test_log_degree_rises_only_at_resonance(m, j, mu):
    assume(m + 1 - mu >= -1)
    out = antideriv_monomial(m, j, mu)
    top = max(lj for _, lj, _ in out)
    assert top == (j + 1 if m == mu - 2 else j)


# --- composition ------------------------------------------------------------

def test_geometric_composition():
    y = S({(1, 0): 1}, K=6)
    got = compose_analytic(TaylorData.geometric(6), [y])
    assert got.same_terms(S({(k, 0): 1 for k in range(7)}))


def test_square_composition_matches_product():
    y = S({(1, 0): 1, (1, 1): 1})
    sq = compose_analytic(TaylorData.polynomial({(2,): 1}), [y])
    assert sq.same_terms(y * y)
    assert sq.same_terms(S({(2, 0): 1, (2, 1): 2, (2, 2): 1}))


def test_bilinear_composition():
    t = S({(1, 0): 1})
    s = S({(2, 0): 3, (4, 0): -1})
    got = compose_analytic(TaylorData.polynomial({(1, 1): 1}), [t, s])
    assert got.same_terms(series_mul(t, s))


def test_composition_domain_errors():
    with pytest.raises(MathDomainError):
        compose_analytic(TaylorData.geometric(6), [S({(0, 0): 2, (1, 0): 1})])
    with pytest.raises(MathDomainError):
        compose_analytic(TaylorData.geometric(2), [S({(1, 0): 1})])


@given(log_series(K=6, min_power=1))
def test_geometric_inverse_identity(y):
    one_minus = S({(0, 0): 1}) - y
    inv = compose_analytic(TaylorData.geometric(6), [y])
    prod = series_mul(one_minus, inv)
    assert prod.truncate(6).same_terms(S({(0, 0): 1}))


# --- two-variable lift ----------------------------------------------------------

def test_lift_examples():
    a = S({(2, 1): 1})
    lifted = two_var_lift(a)
    assert set(lifted.coeffs) == {(1, 1)}
    lam = lambda_apply(lifted)
    assert {k: c.constant_term() for k, c in lam.coeffs.items()} == {(2, 0): 1, (1, 1): 2}
    assert collapse(lam).same_terms(S({(2, 0): 1, (2, 1): 2}))
    assert {k: c.constant_term() for k, c in lambda_apply(two_var_lift(S({(3, 0): 1}))).coeffs.items()} == {(3, 0): 3}
    b = S({(4, 2): 1})
    assert collapse(lambda_apply(two_var_lift(b))).same_terms(b.ddt().shift(1))


def test_lift_rejects_excess_logs():
    with pytest.raises(MathDomainError):
        two_var_lift(S({(1, 2): 1}))


@given(log_series(dim=1, K=5, W=7, differentiable=True))
def test_lift_roundtrip_and_lambda(a):
    assert collapse(two_var_lift(a)).same_terms(a)
    lam = collapse(lambda_apply(two_var_lift(a)))
    ref = a.ddt().shift(1)
    k = min(lam.K, ref.K)
    assert lam.truncate(k).same_terms(ref.truncate(k))


# --- caps, serialization --------------------------------------------------------

def test_log_caps():
    caps = LogCaps(3)
    assert [caps(i) for i in (1, 3, 4, 7)] == [0, 0, 1, 2]
    S({(4, 1): 1}, K=8).with_log_caps(caps)
    with pytest.raises(MathDomainError):
        S({(3, 1): 1}).with_log_caps(caps)


@given(log_series(dim=2, K=5, W=7))
def test_json_roundtrip(a):
    b = series_from_json(series_to_json(a))
    assert b == a


def test_json_layout():
    text = series_to_json(S({(3, 1): F(-2, 3)}, K=4))
    assert '"format": "polyhom.logseries"' in text
    assert '"num": -2' in text and '"den": 3' in text


def test_tangential_truncation_follows_weight():
    p = TangentialPoly(1, {(k,): 1 for k in range(8)})
    s = LogSeries(1, 4, {(2, 0): p}, W=6)
    assert s.coefficient(2).degree() == 4


@given(tangential_polys(2), tangential_polys(2))
def test_tangential_product_evaluates(p, q):
    x = (F(1, 3), F(-2, 5))
    assert (p * q).evaluate(x) == p.evaluate(x) * q.evaluate(x)


@given(nonzero_rationals, st.integers(1, 6))
def test_scaled_monomial_derivative(c, i):
    s = S({(i, 0): c})
    assert series_ddt(s).same_terms(S({(i - 1, 0): c * i}))
