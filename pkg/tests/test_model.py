import numpy as np
import pytest

from cbp import (
    CostFunction,
    DemandPenaltyRate,
    GridConfig,
    PowerRate,
    ProblemInstance,
    default_grid,
    eval_rate,
    validate_instance,
)
from cbp.errors import (
    DeteriorationNotZeroAtOff,
    EmptyHorizon,
    NegativeRateInput,
    NonConvexCost,
    NonIncreasingCost,
    UnstableGrid,
)
from conftest import make_power_instance


def test_reference_instance_validates():
    inst = make_power_instance()
    grid = GridConfig(dt=0.005, n_actions=101)
    assert validate_instance(inst, grid) is inst


def test_eval_rate_values():
    assert eval_rate(PowerRate(1.0, 2.0), 0.5) == pytest.approx(0.25)
    assert eval_rate(PowerRate(1.0, 0.5), 0.0) == 0.0
    assert eval_rate(DemandPenaltyRate(0.0, 1.0, 1.5), 1.0) == pytest.approx(-0.5)
    assert eval_rate(DemandPenaltyRate(2.0, 1.0, 1.5), 2.0) == pytest.approx(1.0)


def test_eval_rate_rejects_negative_input():
    with pytest.raises(NegativeRateInput):
        eval_rate(PowerRate(1.0, 2.0), -0.1)


def test_power_rate_is_zero_at_off_and_increasing():
    rng = np.random.default_rng(5)
    s = np.linspace(0.0, 2.0, 1000)
    for _ in range(20):
        fn = PowerRate(float(rng.uniform(0.1, 3.0)), float(rng.uniform(0.2, 3.0)))
        vals = fn(s)
        assert vals[0] == 0.0
        assert np.all(np.diff(vals) >= 0)


def test_demand_penalty_shape():
    fn = DemandPenaltyRate(bonus=2.0, penalty=1.0, demand=1.5)
    s = np.linspace(0.0, 3.0, 500)
    vals = fn(s)
    assert vals[0] == pytest.approx(-1.5)
    assert np.all(np.diff(vals) >= 0)
    assert fn(1.5) == 0.0


def test_rate_constructor_rejections():
    with pytest.raises(ValueError):
        PowerRate(0.0, 1.0)
    with pytest.raises(ValueError):
        PowerRate(1.0, 0.0)
    with pytest.raises(ValueError):
        PowerRate(-1.0, 2.0)
    with pytest.raises(ValueError):
        DemandPenaltyRate(-0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        DemandPenaltyRate(0.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        DemandPenaltyRate(0.0, 1.0, 0.0)


def test_decreasing_cost_rejected():
    inst = make_power_instance(xi=4)
    bad = ProblemInstance(
        lam=inst.lam,
        xi=4,
        s_max=1.0,
        f=inst.f,
        r=inst.r,
        cost=CostFunction(costs=(1.0, 1.0, 1.0, 1.0, 0.5)),
        horizon=5.0,
    )
    with pytest.raises(NonIncreasingCost):
        validate_instance(bad, GridConfig(dt=0.01))


def test_nonconvex_cost_rejected():
    inst = make_power_instance(xi=3)
    bad = ProblemInstance(
        lam=1.0,
        xi=3,
        s_max=1.0,
        f=inst.f,
        r=inst.r,
        cost=CostFunction(costs=(0.0, 2.0, 3.0, 3.5)),
        horizon=5.0,
    )
    with pytest.raises(NonConvexCost):
        validate_instance(bad, GridConfig(dt=0.01))


def test_two_level_cost_is_convex_and_flagged():
    cost = CostFunction.two_level(2.0, 10.0, 14)
    assert cost.xi == 14
    assert cost.is_two_level
    assert cost(0) == 2.0 and cost(14) == 10.0
    arr = cost.as_array()
    assert np.all(np.diff(arr, 2) >= 0)


def test_demand_penalty_deterioration_rejected():
    inst = make_power_instance(xi=3)
    bad = ProblemInstance(
        lam=1.0,
        xi=3,
        s_max=1.0,
        f=DemandPenaltyRate(0.0, 1.0, 0.5),
        r=inst.r,
        cost=CostFunction.two_level(1.0, 2.0, 3),
        horizon=5.0,
    )
    with pytest.raises(DeteriorationNotZeroAtOff):
        validate_instance(bad, GridConfig(dt=0.01))


def test_unstable_grid_rejected():
    inst = make_power_instance(gamma=1.0, nu=1.0, s_max=1.0, lam=1.0)
    with pytest.raises(UnstableGrid):
        validate_instance(inst, GridConfig(dt=2.0))


def test_horizon_validation():
    inst = make_power_instance(horizon=0.001)
    with pytest.raises(EmptyHorizon):
        validate_instance(inst, GridConfig(dt=0.005))
    with pytest.raises(EmptyHorizon):
        validate_instance(make_power_instance(horizon=-1.0), GridConfig(dt=0.005))


def test_cost_length_must_match_xi():
    inst = make_power_instance(xi=5)
    bad = ProblemInstance(
        lam=1.0,
        xi=5,
        s_max=1.0,
        f=inst.f,
        r=inst.r,
        cost=CostFunction.two_level(1.0, 5.0, 4),
        horizon=5.0,
    )
    with pytest.raises(ValueError):
        validate_instance(bad, GridConfig(dt=0.005))


def test_default_grid_respects_stability():
    inst = make_power_instance(lam=300.0, gamma=1.0, s_max=1.0)
    grid = default_grid(inst)
    assert grid.dt == pytest.approx(1.0 / 600.0)
    slow = default_grid(make_power_instance())
    assert slow.dt == 0.005


def test_grid_config_rejections():
    with pytest.raises(ValueError):
        GridConfig(dt=0.0)
    with pytest.raises(ValueError):
        GridConfig(dt=0.01, n_actions=1)


def test_instance_constructor_rejections():
    with pytest.raises(ValueError):
        make_power_instance(lam=0.0)
    with pytest.raises(ValueError):
        make_power_instance(xi=0)
    with pytest.raises(ValueError):
        make_power_instance(s_max=0.0)
