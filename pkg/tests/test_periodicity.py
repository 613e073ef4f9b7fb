import math

import numpy as np
import pytest
from scipy.optimize import brentq

from periodic_portfolio import (
    EvaluationSpec,
    MarketModel,
    constrained_sharpe,
    solve_log,
    tau_log_scaled,
    tau_log_value,
    tau_power_scaled,
    value_log,
    zeta,
)
from periodic_portfolio.errors import ParameterOutOfRange


def scaled_log_objective(m, cs, gamma, delta, x, tau):
    sol = solve_log(m, EvaluationSpec(tau, gamma, delta), cs)
    return value_log(sol, x) * tau


def test_log_scaled_gamma_one_matches_scalar_root(table_market, table_cone):
    delta = 0.3
    res = tau_log_scaled(
        table_market, EvaluationSpec(1.0, 1.0, delta), table_cone, 0.5
    )
    assert res.condition_holds and res.objective_kind == "scaled_value"
    # independent root of exp(u)*(2-u) = 2 locates delta*tau*
    u_root = brentq(lambda u: math.exp(u) * (2.0 - u) - 2.0, 1.0, 1.99, xtol=1e-14)
    assert delta * res.tau_star == pytest.approx(u_root, abs=1e-6)
    assert res.tau_star == pytest.approx(5.312, abs=1e-3)
    assert res.tau_star > 1.0 / delta


def test_log_scaled_gamma_one_local_certificate(table_market, table_cone):
    res = tau_log_scaled(table_market, EvaluationSpec(1.0, 1.0, 0.3), table_cone, 0.5)
    for bump in (0.999, 1.001):
        assert (
            scaled_log_objective(table_market, table_cone, 1.0, 0.3, 0.5, res.tau_star * bump)
            <= res.objective_at_star + 1e-12
        )


def test_log_scaled_gamma_below_one_gate(table_market, table_cone):
    e = EvaluationSpec(1.0, 0.8, 0.3)
    res = tau_log_scaled(table_market, e, table_cone, 0.5)
    # gate value 0.1272*(0.8/0.3) - 0.1*log(0.5) > 0
    gate = 0.1272 * (0.8 / 0.3) - 0.1 * math.log(0.5)
    assert gate > 0 and res.condition_holds
    assert res.tau_star is not None and res.objective_at_star > 0
    # violated gate: huge initial wealth with a tiny gamma weight
    res_fail = tau_log_scaled(
        table_market, EvaluationSpec(1.0, 0.01, 0.3), table_cone, 1e60
    )
    assert not res_fail.condition_holds and res_fail.tau_star is None


def test_log_value_gate_both_sides(table_market, table_cone):
    e = EvaluationSpec(1.0, 0.8, 0.3)
    threshold = math.exp(-(0.12 + 0.5 * 0.0144) / 0.3)
    res_in = tau_log_value(table_market, e, table_cone, threshold * 0.98)
    assert res_in.condition_holds
    assert res_in.tau_star is not None
    assert res_in.objective_at_star > 0
    res_out = tau_log_value(table_market, e, table_cone, threshold * 1.02)
    assert not res_out.condition_holds and res_out.tau_star is None
    # log(1) = 0 puts x = 1 outside the condition
    res_one = tau_log_value(table_market, e, table_cone, 1.0)
    assert not res_one.condition_holds


def test_log_value_table_point(table_market, table_cone):
    res = tau_log_value(table_market, EvaluationSpec(1.0, 0.8, 0.3), table_cone, 0.5)
    assert res.condition_holds
    assert res.objective_at_star > 0
    for bump in (0.999, 1.001):
        sol = solve_log(
            table_market, EvaluationSpec(res.tau_star * bump, 0.8, 0.3), table_cone
        )
        assert value_log(sol, 0.5) <= res.objective_at_star + 1e-12


def test_log_value_requires_gamma_below_one(table_market, table_cone):
    with pytest.raises(ParameterOutOfRange):
        tau_log_value(table_market, EvaluationSpec(1.0, 1.0, 0.3), table_cone, 0.5)


def test_power_scaled_figure_parameters(table_market, table_cone):
    res = tau_power_scaled(table_market, 0.5, 0.11, table_cone)
    za = zeta(0.5, 0.12, table_cone.objective)
    assert 0.11 / 2 < za < 0.11
    assert res.condition_holds and res.tau_star is not None
    assert "1/delta" in res.condition_detail  # records the g(0+) limit
    # unimodal on the searched range: increasing then decreasing slope signs
    def g(tau):
        return math.exp((za - 0.11) * tau) * tau / (1.0 - math.exp(-0.11 * tau))

    taus = np.linspace(res.tau_star / 20, res.tau_star * 5, 200)
    slopes = np.sign(np.diff([g(t) for t in taus]))
    switch = np.where(np.diff(slopes) != 0)[0]
    assert len(switch) == 1
    for bump in (0.999, 1.001):
        assert g(res.tau_star * bump) <= res.objective_at_star + 1e-12


def test_power_scaled_condition_gate(table_market, table_cone):
    # zeta(alpha) >= delta: no search
    res = tau_power_scaled(table_market, 0.5, 0.05, table_cone)
    assert not res.condition_holds and res.tau_star is None
    assert math.isnan(res.objective_at_star)
    # capped supremum still reported when requested
    res_cap = tau_power_scaled(table_market, 0.5, 0.05, table_cone, sup_cap=50.0)
    assert not res_cap.condition_holds and res_cap.tau_star is not None


def test_scaled_objectives_vanish_at_long_horizons(table_market, table_cone):
    res = tau_power_scaled(table_market, 0.5, 0.11, table_cone)
    za = zeta(0.5, 0.12, table_cone.objective)
    far = 1e3 / 0.11
    g_far = math.exp((za - 0.11) * far) * far / (1.0 - math.exp(-0.11 * far))
    assert g_far < 1e-6 * res.objective_at_star

    res_log = tau_log_scaled(table_market, EvaluationSpec(1.0, 1.0, 0.3), table_cone, 0.5)
    f_far = scaled_log_objective(table_market, table_cone, 1.0, 0.3, 0.5, 1e3 / 0.3)
    assert f_far < 1e-6 * res_log.objective_at_star
