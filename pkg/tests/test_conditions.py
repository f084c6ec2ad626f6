import json
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from qfourier import catalog
from qfourier.conditions import (
    FAILS_NUMERIC,
    HOLDS_ANALYTIC,
    HOLDS_NUMERIC,
    OutOfScopeError,
    alpha_tilde,
    check_all,
    check_cond14,
    check_condMW,
    check_flin,
    check_irf,
    check_lin23,
    check_mixing,
    check_sufcond,
    comparison_sum,
    partial_sum_table,
    projection_norm_square_normal,
    quantile_square_integral,
    rio_table,
)
from qfourier.models import Coefficients, LinearProcess
from qfourier.reporting import dumps


def boundary_power_spec():
    # a_j = (j+2)^(-1/2) log(j+2)^(-3/4): square summable, sum a_j^2 log j diverges
    return LinearProcess(Coefficients(tail="power", power=0.5, log_power=0.75, shift=2.0))


def test_partial_sum_table_decades():
    table = partial_sum_table(np.ones(1000))
    assert table == [(10, 10.0), (100, 100.0), (1000, 1000.0)]


@pytest.mark.parametrize("r,sigma", [(2.0, 0.0), (1.5, 1.0), (3.0, -1.0), (1.0, -2.0)])
def test_comparison_sum_is_an_upper_bound(r, sigma):
    """For a decreasing summand the sum lies in [I, f(x1) + I] with I = int_{x1}^inf f;
    the closed form may loosen I by its log factor but stays within 50% here."""
    k1, c = 50, 1.0
    x1 = k1 + c
    f = lambda x: x**-r * math.log(x) ** sigma
    # substitute x = exp(y) so the slowly decaying case stays well conditioned
    integral, _ = integrate.quad(lambda y: math.exp((1 - r) * y) * y**sigma, math.log(x1), np.inf, epsabs=1e-13)
    direct = math.fsum(f(k + c) for k in range(k1, 20_000))
    bound = comparison_sum(1.0, c, r, sigma, k1)
    assert direct < bound
    assert integral <= bound <= 1.5 * (integral + f(x1))


def test_comparison_sum_diverges():
    assert comparison_sum(1.0, 0.0, 1.0, 0.0, 10) == math.inf
    assert comparison_sum(1.0, 0.0, 0.9, 0.0, 10) == math.inf
    assert comparison_sum(0.0, 0.0, 0.9, 0.0, 10) == 0.0


def test_ar1_series_values():
    rho = 0.5
    spec = catalog.ar1(rho)
    r16 = check_sufcond(spec, K=10_000)
    assert r16.verdict == HOLDS_ANALYTIC
    # sum_k rho^(2k) / ((1 - rho^2) k)
    assert r16.partial_sums[-1][1] == pytest.approx(-math.log(1 - rho**2) / (1 - rho**2), rel=1e-12)
    r14 = check_cond14(spec, K=10_000)
    expected = (1 - rho) ** 2 / (1 - rho**2) * -math.log(1 - rho**2)
    assert r14.partial_sums[-1][1] == pytest.approx(expected, rel=1e-12)


def test_flip_chain_series_value():
    p = 0.2
    r = 1 - 2 * p
    rep = check_sufcond(catalog.flip_chain(p), K=10_000)
    assert rep.verdict == HOLDS_ANALYTIC
    assert rep.partial_sums[-1][1] == pytest.approx(-math.log(1 - r * r), rel=1e-12)


def test_boundary_family_separates_conditions():
    spec = boundary_power_spec()
    assert check_sufcond(spec, K=100_000).verdict == FAILS_NUMERIC
    assert check_flin(spec, K=100_000).verdict == FAILS_NUMERIC
    assert check_cond14(spec, K=100_000).verdict == HOLDS_NUMERIC
    assert check_lin23(spec, K=100_000).verdict == HOLDS_NUMERIC
    assert check_condMW(spec, 1.0).verdict == HOLDS_ANALYTIC


def test_summable_log_tail_is_numeric():
    spec = LinearProcess(Coefficients(tail="power", power=1.0, log_power=1.0, shift=2.0))
    rep = check_sufcond(spec, K=1_000_000)
    assert rep.verdict == HOLDS_NUMERIC
    assert rep.tail_bound < 1e-5


def test_cond18_norms_within_uniform_bound():
    for spec in (catalog.ar1(0.5), catalog.three_state_chain()):
        rep = check_condMW(spec, 1.0)
        assert rep.verdict == HOLDS_ANALYTIC
        assert rep.extra["max_norm"] <= rep.extra["uniform_bound"] * (1 + 1e-12)
        assert rep.partial_sums[-1][1] <= rep.extra["analytic_total"]


def test_cond18_singular_frequency_inconclusive():
    rep = check_condMW(catalog.flip_chain(0.3), 0.0)
    assert rep.verdict == "inconclusive"


def test_square_projection_monte_carlo_matches_closed_form():
    spec = catalog.ar1(0.6)
    rep = check_flin(spec, observable="square", K=1000, mc_js=[0, 2, 5], mc_outer=40_000, seed=3)
    for row in rep.extra["projection_mc"]:
        exact = projection_norm_square_normal(spec, row["j"])
        assert abs(row["estimate"] - exact) < 4 * row["stderr"]


def test_alpha_tilde_flip_chain():
    p = 0.15
    r = 1 - 2 * p
    spec = catalog.flip_chain(p)
    for k in (1, 2, 7):
        assert alpha_tilde(spec, k) == pytest.approx(r**k / 4, rel=1e-12)
    assert quantile_square_integral(spec, 0.3) == pytest.approx(0.3)


def test_rio_literal_counterexample():
    spec = catalog.flip_chain(0.05)  # r = 0.9
    row = rio_table(spec, [1])[0]
    assert row["lhs"] == pytest.approx(0.81)
    assert row["rhs"] == pytest.approx(0.45)
    assert not row["holds"]
    assert rio_table(spec, [1], scale=2.0)[0]["holds"]


def test_mixing_shortcut_flip_chain():
    p = 0.3
    r = 1 - 2 * p
    rep = check_mixing(catalog.flip_chain(p))
    assert rep.verdict == HOLDS_ANALYTIC
    assert rep.extra["shortcut"]["verdict"] == HOLDS_ANALYTIC
    assert rep.extra["shortcut"]["partial_sums"][-1][1] == pytest.approx(-math.log(1 - r) / 4, rel=1e-10)
    assert rep.extra["alpha_monotone"]


def test_irf_reports():
    r20, r21 = check_irf(catalog.half_contraction(), N=5000, seed=1, steps=20)
    assert r20.verdict == HOLDS_ANALYTIC
    assert r20.extra["coupling"]["rate"] == pytest.approx(0.5, rel=0.02)
    assert r21.verdict == HOLDS_ANALYTIC
    mc = r21.extra["monte_carlo"]
    assert mc["integral"] - 3 * mc["integral_stderr"] <= r21.tail_bound
    assert r21.tail_bound == pytest.approx(float(mpmath.e1(2 * math.log(2))), rel=1e-12)


def test_long_memory_is_out_of_scope():
    with pytest.raises(OutOfScopeError):
        check_all(catalog.long_memory())


def test_reports_serialise():
    reports = check_all(catalog.three_state_chain(), 1.0, 0, K=1000)
    payload = json.loads(dumps([r.to_dict() for r in reports]))
    assert {r["condition_id"] for r in payload} == {"cond-16", "cond-15", "cond-14", "cond-18", "cond-mix30"}
