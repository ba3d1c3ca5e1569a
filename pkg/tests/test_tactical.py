import numpy as np
import pytest
from scipy import integrate, stats

from cbp import (
    GridConfig,
    average_profit,
    compare_integrated_sequential,
    default_grid,
    optimize_interval,
    profit_curve,
    sequential_interval,
)
from cbp.errors import InvalidCosts
from cbp.tactical import maintenance_cost_rate
from conftest import make_base_case, make_power_instance, random_valid_instance


def test_average_profit_matches_curve(wear_instance):
    grid = default_grid(wear_instance)
    times, g = profit_curve(wear_instance, 6.0, grid)
    for k in (10, 200, 1199):
        assert average_profit(wear_instance, times[k], grid) == g[k]


def test_optimizer_matches_dense_grid_argmax():
    rng = np.random.default_rng(99)
    cases = [
        (make_power_instance(), (0.5, 30.0)),
        (make_power_instance(gamma=0.5, nu=2.0), (0.5, 30.0)),
        (make_base_case(), (0.5, 40.0)),
        (random_valid_instance(rng), (0.5, 20.0)),
        (random_valid_instance(rng), (0.5, 20.0)),
    ]
    for inst, bounds in cases:
        grid = default_grid(inst, n_actions=51)
        res = optimize_interval(inst, bounds, grid)
        times, g = profit_curve(inst, bounds[1], grid)
        keep = times >= bounds[0]
        dense_t = times[keep][np.argmax(g[keep])]
        assert abs(res.t_star - dense_t) <= 2 * grid.dt, (inst, res.t_star, dense_t)
        assert res.g_star >= g[keep].max() - 1e-12


def test_scaling_invariance(wear_instance):
    import dataclasses

    from cbp import CostFunction, PowerRate

    grid = GridConfig(dt=0.01, n_actions=41)
    res1 = optimize_interval(wear_instance, (1.0, 15.0), grid)
    doubled = dataclasses.replace(
        wear_instance,
        r=PowerRate(2.0, 0.5),
        cost=CostFunction.two_level(2.0, 10.0, 10),
    )
    res2 = optimize_interval(doubled, (1.0, 15.0), grid)
    assert res2.t_star == res1.t_star
    assert res2.g_star == pytest.approx(2 * res1.g_star, rel=1e-12)


def test_boundary_flag_on_monotone_curve():
    # heavy maintenance costs: average profit negative and increasing in T
    inst = make_power_instance(gamma=0.5, nu=2.0, cp=40.0, cu=50.0, horizon=30.0)
    grid = default_grid(inst)
    res = optimize_interval(inst, (1.0, 30.0), grid)
    assert res.boundary_hit
    assert res.warning is not None
    assert res.t_star == pytest.approx(30.0, abs=2 * grid.dt)
    assert res.g_star < 0


def test_curve_attached_and_sorted(wear_instance):
    res = optimize_interval(wear_instance, (1.0, 12.0), GridConfig(dt=0.01, n_actions=41))
    ts = [t for t, _ in res.curve]
    assert ts == sorted(ts)
    assert (res.t_star, res.g_star) in res.curve


def test_cost_rate_closed_form_matches_quadrature():
    lam, xi, cp, cu = 1.0, 14, 2.0, 10.0
    for t in (2.0, 7.5, 20.0, 55.0):
        numer = cp + (cu - cp) * stats.gamma.cdf(t, a=xi, scale=1.0 / lam)
        denom, err = integrate.quad(
            lambda u: stats.gamma.sf(u, a=xi, scale=1.0 / lam), 0.0, t, limit=200
        )
        assert err < 1e-10
        closed = maintenance_cost_rate(lam, xi, cp, cu, t)
        assert closed == pytest.approx(numer / denom, abs=1e-8)


def test_sequential_interval_base_case_interior():
    res = sequential_interval(1.0, 14, 2.0, 10.0, (0.5, 140.0))
    assert not res.boundary_hit
    # dense-scan oracle
    ts = np.arange(0.5, 140.0, 0.01)
    rates = [maintenance_cost_rate(1.0, 14, 2.0, 10.0, t) for t in ts]
    t_dense = ts[int(np.argmin(rates))]
    assert res.t_star == pytest.approx(t_dense, abs=0.02)
    assert res.cost_rate == pytest.approx(min(rates), rel=1e-6)


def test_sequential_interval_exponential_lifetime_boundary():
    # age-based replacement has no finite optimum for a memoryless lifetime
    res = sequential_interval(1.0, 1, 2.0, 10.0, (0.5, 50.0))
    assert res.boundary_hit
    assert res.t_star == pytest.approx(50.0, rel=1e-3)
    ts = np.linspace(0.5, 50.0, 200)
    rates = [maintenance_cost_rate(1.0, 1, 2.0, 10.0, t) for t in ts]
    assert np.all(np.diff(rates) < 0)


def test_cost_rate_explodes_at_zero():
    assert maintenance_cost_rate(1.0, 14, 2.0, 10.0, 1e-6) > 1e5


def test_invalid_costs_rejected():
    with pytest.raises(InvalidCosts):
        sequential_interval(1.0, 14, 10.0, 10.0, (0.5, 50.0))


def test_compare_integrated_sequential_base_case():
    inst = make_base_case()
    grid = default_grid(inst)
    bounds = (10 * grid.dt, 10 * inst.xi / inst.lam)
    cmp_result = compare_integrated_sequential(inst, bounds, grid)
    assert cmp_result.r_hat >= -1e-6
    assert cmp_result.t_integrated / cmp_result.t_sequential < 1.0
    assert cmp_result.p_integrated == pytest.approx(
        average_profit(inst, cmp_result.t_integrated, grid), rel=1e-12
    )


def test_compare_requires_two_level_cost():
    import dataclasses

    from cbp import CostFunction

    inst = make_base_case(xi=4)
    inst = dataclasses.replace(inst, cost=CostFunction((0.0, 1.0, 2.5, 4.5, 10.0)))
    with pytest.raises(ValueError):
        compare_integrated_sequential(inst, (0.5, 20.0), default_grid(inst))
