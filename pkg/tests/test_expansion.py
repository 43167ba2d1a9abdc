import math
import time
from fractions import Fraction as F

import pytest
from conftest import CONFIGS
from hypothesis import given
from hypothesis import strategies as st
from oracles import ln_ball_terms

from polyhom.config import load_config
from polyhom.errors import MathDomainError
from polyhom.expansion import (
    MajorantConfig, StabilizationError, euler_inverse, fit_ratio, local_expansion, majorant_report,
    match_coefficients, physical, run_iteration, seed_expansion,
)
from polyhom.problems import linear_problem, ln_ball_solution, loewner_nirenberg_problem
from polyhom.series import LogSeries
from polyhom.singular_ode import euler_apply, residual

SHIPPED = [
    "hemisphere_n3", "hemisphere_n4",
    "ln_halfspace_n3", "ln_halfspace_n4", "ln_halfspace_n5", "ln_halfspace_n6",
    "ln_ball_n3", "ln_ball_n4", "ln_ball_n6",
]
EXTRA = ["minimal_graph_n3", "linear_homogeneous", "planted_resonance"]


def build(name):
    spec = load_config(CONFIGS / f"{name}.ini").problem
    prob, datum = spec.build()
    return spec, prob, datum


@pytest.mark.parametrize("name", SHIPPED + EXTRA)
def test_match_equals_iterate(name):
    spec, prob, datum = build(name)
    start = time.perf_counter()
    matched = match_coefficients(prob, datum, spec.K, spec.W)
    iterated, _ = run_iteration(prob, datum, spec.K, spec.W)
    assert time.perf_counter() - start < 10
    assert matched == iterated


@pytest.mark.parametrize("name", SHIPPED + EXTRA)
def test_residual_vanishes_through_K(name):
    spec, prob, datum = build(name)
    series = match_coefficients(prob, datum, spec.K, spec.W)
    res = residual(prob, series)
    assert all(not c for (i, _), c in res.coeffs.items() if i <= spec.K)


def test_residual_flags_a_wrong_coefficient():
    prob = loewner_nirenberg_problem(3, "ball")
    good = ln_ball_solution(3, 8)
    bad = good + LogSeries(0, 8, {(2, 0): F(1, 100)})
    assert any(c for (i, _), c in residual(prob, bad).coeffs.items() if i <= 8)


def test_ln_ball_iterate_fixture():
    prob = loewner_nirenberg_problem(4, "ball")
    datum = ln_ball_solution(4, 4).coefficient(4, 0).constant_term()
    series, trace = run_iteration(prob, datum, 10)
    assert {i: c.constant_term() for (i, j), c in series.items()} == ln_ball_terms(4, 10)
    assert series.coefficient(4, 1).is_zero()
    assert trace.steps and trace.steps[-1].v.truncate(10) == series


def test_physical_adds_offset():
    prob = loewner_nirenberg_problem(3, "ball")
    v = ln_ball_solution(3, 4)
    assert physical(prob, v).coefficient(0, 0).constant_term() == 1


def test_local_stage_and_seed():
    prob = linear_problem(0, 4, {4: 5, 6: 1}, F(1, 2))
    local = local_expansion(prob, 2, prob.m_high + 1)
    assert local.coefficient(4, 1).constant_term() == F(5, 4)
    seed = seed_expansion(prob, local, 2, 10)
    assert seed.coefficient(4, 0).constant_term() == 2
    assert seed.coefficient(4, 1).constant_term() == F(5, 4)
    with pytest.raises(MathDomainError):
        seed_expansion(prob, local.truncate(4), 2)


@given(st.integers(2, 8), st.integers(0, 2))
def test_euler_inverse_is_a_right_inverse(m, j):
    prob = linear_problem(-1, 4)
    r = LogSeries(0, 12, {(m + 2, j): 1})
    w = euler_inverse(prob, r, regularized=True)
    assert euler_apply(w, prob.p, prob.q).same_terms(r)


def test_iteration_needs_room_above_the_root():
    prob = loewner_nirenberg_problem(4, "ball")
    with pytest.raises(MathDomainError):
        run_iteration(prob, 0, 4)


def test_stabilization_error_exit_code():
    assert StabilizationError.exit_code == 4


# --- majorant monitor ---------------------------------------------------------------

def test_majorant_index_sequence():
    cfg = MajorantConfig()
    a = [cfg.a(k) for k in range(1, 40)]
    assert all(x > y for x, y in zip(a, a[1:]))
    for k in range(1, 20):
        assert cfg.a(k + 1) == pytest.approx(cfg.a(k) * (1 - (k + 2) ** -2))
    assert a[-1] > cfg.a_limit


def test_fit_ratio_recovers_geometric_decay():
    assert fit_ratio([9.0, 7.0] + [3 * 0.4**k for k in range(6)]) == pytest.approx(0.4)
    assert fit_ratio([1.0, 1.0, 5.0]) == 0.0
    assert fit_ratio([]) == 0.0


@given(st.floats(0.05, 0.95), st.floats(0.1, 10), st.integers(3, 10))
def test_fit_ratio_property(rho, scale, count):
    values = [1.0, 1.0] + [scale * rho**k for k in range(count)]
    assert fit_ratio(values) == pytest.approx(rho, rel=1e-9)


def test_majorant_config_rejects_bad_values():
    with pytest.raises(ValueError):
        MajorantConfig(theta=1.5)


@pytest.mark.parametrize("name", SHIPPED + EXTRA)
def test_majorant_decays_on_shipped_problems(name):
    spec, prob, datum = build(name)
    _, trace = run_iteration(prob, datum, spec.K, spec.W)
    report = majorant_report(trace)
    assert report.passed
    assert report.ratio <= 0.6
    assert all(math.isfinite(r.m_max) for r in report.rows)
    assert "fitted_ratio" in report.to_csv()
