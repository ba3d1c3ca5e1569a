import dataclasses

import numpy as np
import pytest

from cbp import (
    DemandPenaltyRate,
    GridConfig,
    check_bang_bang,
    default_grid,
    extract_switching_curve,
    solve,
    solve_auto,
    verify_structure,
)
from cbp.errors import IncompatibleGrids, NotBangBangSolution
from cbp.hjb import bang_bang_actions
from cbp.structure import (
    CONVEX_CONCAVE,
    EQUAL_FUNCTIONS,
    NOT_DETECTED,
    POWER_EXPONENT_DOMINANCE,
)
from conftest import make_power_instance, random_valid_instance


def test_verdict_power_dominance(onoff_instance):
    v = check_bang_bang(onoff_instance)
    assert v.is_bang_bang and v.reason == POWER_EXPONENT_DOMINANCE
    assert v.worst_ratio_gap >= -1e-12


def test_verdict_equal_functions():
    inst = make_power_instance(gamma=1.3, nu=1.3)
    v = check_bang_bang(inst)
    assert v.is_bang_bang and v.reason == EQUAL_FUNCTIONS


def test_verdict_convex_demand_revenue():
    inst = make_power_instance(gamma=0.5)
    inst = dataclasses.replace(inst, r=DemandPenaltyRate(2.0, 1.0, 0.4))
    v = check_bang_bang(inst)
    assert v.is_bang_bang and v.reason == CONVEX_CONCAVE


def test_verdict_negative(wear_instance):
    # revenue/wear ratio s**-1.5 decreases, so the grid test fails everywhere
    v = check_bang_bang(wear_instance)
    assert not v.is_bang_bang and v.reason == NOT_DETECTED
    assert v.worst_ratio_gap < 0


def test_verdict_ignores_base_rate(wear_instance, onoff_instance):
    for inst in (wear_instance, onoff_instance):
        low = check_bang_bang(inst.with_lambda(0.01))
        high = check_bang_bang(inst.with_lambda(50.0))
        assert low == high == check_bang_bang(inst)


def test_verdict_sound_for_solver(onoff_instance):
    # a positive verdict means the full action grid lands on the extremes
    sol = solve(onoff_instance, default_grid(onoff_instance))
    step = sol.action_step
    near_extreme = (sol.policy <= step + 1e-12) | (
        sol.policy >= onoff_instance.s_max - step - 1e-12
    )
    assert np.all(near_extreme)


def test_solve_auto_restricts_actions(onoff_instance, wear_instance):
    grid = GridConfig(dt=0.01, n_actions=51)
    assert solve_auto(onoff_instance, grid).actions.size == 2
    assert solve_auto(wear_instance, grid).actions.size == 51


def test_switching_curve_monotone_and_rate_ordered(onoff_instance):
    grid = default_grid(onoff_instance.with_lambda(4.0))
    actions = bang_bang_actions(onoff_instance)
    slow = solve(onoff_instance, grid, actions=actions)
    fast = solve(onoff_instance.with_lambda(4.0), grid, actions=actions)
    c_slow = extract_switching_curve(slow)
    c_fast = extract_switching_curve(fast)
    assert np.all(np.diff(c_slow.threshold) >= 0)
    assert np.all(np.diff(c_fast.threshold) >= 0)
    assert np.all(c_fast.threshold <= c_slow.threshold)


def test_switching_curve_constant_cost_never_off():
    # equal preventive and corrective cost: failure only forfeits revenue,
    # so production stays on below the failure level
    inst = make_power_instance(xi=6, gamma=1.0, nu=1.0, cp=2.0, cu=2.0, horizon=10.0)
    grid = GridConfig(dt=0.005, n_actions=2)
    sol = solve(inst, grid, actions=bang_bang_actions(inst))
    curve = extract_switching_curve(sol)
    assert np.all(curve.threshold == inst.xi)

    # cross-check against a hand recursion for the two-state version
    inst2 = make_power_instance(xi=1, gamma=1.0, nu=1.0, cp=2.0, cu=2.0, horizon=10.0)
    sol2 = solve(inst2, grid, actions=bang_bang_actions(inst2))
    j_on = -2.0
    for n in range(sol2.n_steps):
        delta = j_on - (-2.0)
        gain = max(0.0, 1.0 - 1.0 * 1.0 * delta)
        j_on = j_on + 0.005 * gain
        assert sol2.values[0, n + 1] == pytest.approx(j_on, abs=1e-12)
    assert np.all(extract_switching_curve(sol2).threshold == 1)


def test_interior_policy_rejected(wear_solution):
    with pytest.raises(NotBangBangSolution):
        extract_switching_curve(wear_solution)


def test_structure_report_passes_on_rate_pair(wear_instance, wear_solution):
    grid = GridConfig(dt=0.005, n_actions=101)
    fast = solve(wear_instance.with_lambda(4.0), grid)
    report = verify_structure([wear_solution, fast])
    assert report.all_passed, report.to_text()
    names = {c.name for c in report.checks}
    assert {
        "value_monotone_x",
        "value_monotone_t",
        "value_monotone_lambda",
        "value_concave_x",
        "value_concave_t",
        "delta_increasing_t",
        "delta_submodular_lambda",
        "policy_monotone_x",
        "policy_monotone_t",
        "policy_monotone_lambda",
    } <= names


def test_structure_report_random_instances():
    rng = np.random.default_rng(321)
    for _ in range(4):
        inst = random_valid_instance(rng)
        grid = default_grid(inst.with_lambda(inst.lam * 2.5))
        sols = [
            solve(inst, grid),
            solve(inst.with_lambda(inst.lam * 2.5), grid),
        ]
        report = verify_structure(sols)
        assert report.all_passed, report.to_text()


def test_corrupted_grid_detected(wear_solution):
    broken = dataclasses.replace(
        wear_solution, values=wear_solution.values.copy()
    )
    mid = broken.values.shape[1] // 2
    broken.values[3, mid] += 1.0
    report = verify_structure([broken])
    assert not report.all_passed
    failed = {c.name: c for c in report.checks if not c.passed}
    assert "value_concave_x" in failed
    assert failed["value_concave_x"].n == mid


def test_single_grid_skips_rate_checks(wear_solution):
    report = verify_structure([wear_solution])
    names = {c.name for c in report.checks}
    assert not any("lambda" in n for n in names)
    assert report.all_passed


def test_incompatible_grids_rejected(wear_instance, wear_solution):
    other = solve(
        wear_instance.with_lambda(2.0).with_horizon(5.0),
        GridConfig(dt=0.005, n_actions=101),
    )
    with pytest.raises(IncompatibleGrids):
        verify_structure([wear_solution, other])


def test_report_csv_and_text(tmp_path, wear_solution):
    report = verify_structure([wear_solution])
    path = tmp_path / "report.csv"
    report.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "property,pass,max_violation,x,n,lambda"
    assert len(lines) == 1 + len(report.checks)
    assert "value_monotone_x" in report.to_text()
