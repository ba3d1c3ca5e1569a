"""Static fixed-rate baseline policy and the condition-based value metric.

Under a fixed production rate s the time to failure is Erlang with shape
xi and rate lam * f(s), which gives the expected profit over one
maintenance interval in closed form for the canonical two-level
maintenance cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import structure
from .errors import DegenerateBaseline, RateOutOfRange
from .model import GridConfig, ProblemInstance, eval_rate

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def erlang_cdf(k: int, mu: float, t: float) -> float:
    """P[Erlang(k, mu) <= t] via a running-term Poisson tail sum."""
    if t <= 0.0:
        return 0.0
    mut = mu * t
    term = math.exp(-mut)
    tail = term
    for j in range(1, k):
        term *= mut / j
        tail += term
    return min(1.0, max(0.0, 1.0 - tail))


def expected_min_erlang(k: int, mu: float, t: float) -> float:
    """E[min{Erlang(k, mu), t}], the expected running time before t.

    Equals (1/mu) * sum_{j=1..k} P[Erlang(j, mu) <= t], obtained by
    integrating the survival function term by term.
    """
    if t <= 0.0:
        return 0.0
    total = 0.0
    for j in range(1, k + 1):
        total += erlang_cdf(j, mu, t)
    return total / mu


@dataclass(frozen=True)
class FixedRateResult:
    s_star: float
    expected_profit: float
    p_failure: float
    expected_runtime: float


def _two_level(inst: ProblemInstance):
    if not inst.cost.is_two_level:
        raise ValueError("fixed-rate formulas require the two-level cost structure")
    return inst.cost(0), inst.cost(inst.xi)


def fixed_rate_profit(inst: ProblemInstance, s: float, T: float) -> float:
    """Expected profit of running rate s until failure or maintenance at T."""
    cp, cu = _two_level(inst)
    if s < 0.0 or s > inst.s_max * (1 + 1e-12):
        raise RateOutOfRange(f"rate {s} outside [0, {inst.s_max}]")
    mu = inst.lam * eval_rate(inst.f, s)
    if mu == 0.0:
        # Production off never deteriorates: revenue accrues over all of T.
        return eval_rate(inst.r, s) * T - cp
    return (
        eval_rate(inst.r, s) * expected_min_erlang(inst.xi, mu, T)
        - cp
        - (cu - cp) * erlang_cdf(inst.xi, mu, T)
    )


def optimize_fixed_rate(
    inst: ProblemInstance, T: float, n_actions: int = 101
) -> FixedRateResult:
    """Best fixed rate: grid scan first, then golden-section on the bracket.

    The objective need not be unimodal, so the scan protects against
    converging to a local maximum.
    """
    rates = np.linspace(0.0, inst.s_max, n_actions)
    profits = [fixed_rate_profit(inst, s, T) for s in rates]
    i = int(np.argmax(profits))
    a = rates[max(i - 1, 0)]
    b = rates[min(i + 1, n_actions - 1)]
    best_s, best_p = float(rates[i]), profits[i]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = fixed_rate_profit(inst, c, T)
    fd = fixed_rate_profit(inst, d, T)
    while b - a > 1e-9 * inst.s_max:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fixed_rate_profit(inst, c, T)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fixed_rate_profit(inst, d, T)
    for s, p in ((c, fc), (d, fd)):
        if p > best_p:
            best_s, best_p = float(s), p
    mu = inst.lam * eval_rate(inst.f, best_s)
    if mu == 0.0:
        p_failure, runtime = 0.0, T
    else:
        p_failure = erlang_cdf(inst.xi, mu, T)
        runtime = expected_min_erlang(inst.xi, mu, T)
    return FixedRateResult(
        s_star=best_s,
        expected_profit=best_p,
        p_failure=p_failure,
        expected_runtime=runtime,
    )


def relative_value(inst: ProblemInstance, T: float, grid: GridConfig) -> float:
    """Percent profit increase of the optimal dynamic policy over the best
    fixed rate, 100 * (P_dynamic - P_fixed) / P_fixed."""
    p_fs = optimize_fixed_rate(inst, T).expected_profit
    if abs(p_fs) < 1e-9:
        raise DegenerateBaseline("fixed-rate profit is zero; relative value undefined")
    sol = structure.solve_auto(inst.with_horizon(T), grid)
    p_cs = float(sol.values[0, -1])
    return 100.0 * (p_cs - p_fs) / p_fs
