"""Maintenance-interval optimization: integrated and sequential approaches.

The integrated approach maximizes the average profit per time unit
g(T) = J(0, T) / T under the optimal operational policy; a strict local
maximizer of g is known to be global, so golden-section search applies.
The sequential approach first picks the classical age-based interval from
maintenance costs alone, then runs the optimal operational policy inside
it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import structure
from .baseline import erlang_cdf, expected_min_erlang
from .errors import InvalidCosts
from .hjb import bang_bang_actions
from .model import GridConfig, ProblemInstance

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class IntervalResult:
    t_star: float
    g_star: float
    boundary_hit: bool
    curve: tuple
    warning: Optional[str] = None


def average_profit(inst: ProblemInstance, T: float, grid: GridConfig) -> float:
    """Average profit per time unit over one interval of length T."""
    sol = structure.solve_auto(inst.with_horizon(T), grid)
    return float(sol.values[0, -1]) / T


def profit_curve(inst: ProblemInstance, t_max: float, grid: GridConfig):
    """g(T) on every grid multiple up to t_max, from a single solve.

    The backward recursion at horizon t_max passes through the value for
    every shorter horizon, so the whole curve costs one solve.
    """
    sol = structure.solve_auto(inst.with_horizon(t_max), grid)
    n = np.arange(1, sol.n_steps + 1)
    times = n * grid.dt
    return times, sol.values[0, 1:] / times


def optimize_interval(
    inst: ProblemInstance, bounds, grid: GridConfig
) -> IntervalResult:
    """Golden-section maximization of g(T), refined to the time-step grid.

    The search narrows the bracket to a handful of time steps and then
    scans the grid multiples inside it, so the result matches a dense-grid
    argmax whenever g is unimodal on the bounds. A maximizer within two
    time steps of either bound is flagged: g may be monotone on the whole
    domain (no interior maximizer).
    """
    t_min, t_max = float(bounds[0]), float(bounds[1])
    if not 0 < t_min < t_max:
        raise ValueError(f"need 0 < T_min < T_max, got {bounds}")
    t_min = max(t_min, grid.dt)
    actions = None
    if structure.check_bang_bang(inst).is_bang_bang:
        actions = bang_bang_actions(inst)

    def g(T: float) -> float:
        sol = structure.hjb.solve(inst.with_horizon(T), grid, actions=actions)
        return float(sol.values[0, -1]) / T

    probes = {}

    def probe(T: float) -> float:
        if T not in probes:
            probes[T] = g(T)
        return probes[T]

    a, b = t_min, t_max
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    while b - a > 8 * grid.dt:
        if probe(c) >= probe(d):
            b, d = d, c
            c = b - _GOLDEN * (b - a)
        else:
            a, c = c, d
            d = a + _GOLDEN * (b - a)
    for n in range(max(1, math.floor(a / grid.dt)), math.ceil(b / grid.dt) + 1):
        T = n * grid.dt
        if t_min <= T <= t_max:
            probe(T)
    probe(t_min)
    probe(t_max)

    t_star = max(probes, key=probes.get)
    g_star = probes[t_star]
    boundary_hit = t_star - t_min <= 2 * grid.dt or t_max - t_star <= 2 * grid.dt
    warning = None
    if boundary_hit:
        warning = (
            "maximizer at the search boundary; g may be monotone on the domain"
        )
    curve = tuple(sorted(probes.items()))
    return IntervalResult(
        t_star=float(t_star),
        g_star=g_star,
        boundary_hit=boundary_hit,
        curve=curve,
        warning=warning,
    )


@dataclass(frozen=True)
class SequentialResult:
    t_star: float
    cost_rate: float
    boundary_hit: bool


def maintenance_cost_rate(lam: float, xi: int, cp: float, cu: float, t: float) -> float:
    """Age-based average maintenance cost per time unit for interval t."""
    return (cp + (cu - cp) * erlang_cdf(xi, lam, t)) / expected_min_erlang(xi, lam, t)


def sequential_interval(
    lam: float, xi: int, cp: float, cu: float, bounds
) -> SequentialResult:
    """Minimize the age-based maintenance cost rate over the bounds.

    The lifetime under normal operation is Erlang(xi, lam); its increasing
    hazard rate makes the minimizer unique, so golden-section search
    applies. With an exponential lifetime (xi = 1) there is no finite
    optimum and the upper bound is returned flagged.
    """
    if cp >= cu:
        raise InvalidCosts(
            f"preventive cost {cp} must be below corrective cost {cu}; "
            "otherwise the minimizer degenerates to an infinite interval"
        )
    t_min, t_max = float(bounds[0]), float(bounds[1])
    if not 0 < t_min < t_max:
        raise ValueError(f"need 0 < T_min < T_max, got {bounds}")

    def g_mc(t: float) -> float:
        return maintenance_cost_rate(lam, xi, cp, cu, t)

    a, b = t_min, t_max
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = g_mc(c), g_mc(d)
    tol = 1e-8 * (t_max - t_min)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = g_mc(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = g_mc(d)
    t_star = (a + b) / 2.0
    edge = 1e-4 * (t_max - t_min)
    boundary_hit = t_star - t_min <= edge or t_max - t_star <= edge
    return SequentialResult(
        t_star=t_star, cost_rate=g_mc(t_star), boundary_hit=boundary_hit
    )


@dataclass(frozen=True)
class ComparisonResult:
    r_hat: float
    t_integrated: float
    t_sequential: float
    p_integrated: float
    p_sequential: float


def compare_integrated_sequential(
    inst: ProblemInstance, bounds, grid: GridConfig
) -> ComparisonResult:
    """Percent profit-rate gain of the integrated interval over the
    sequential one, 100 * (p_integrated - p_sequential) / p_sequential."""
    if not inst.cost.is_two_level:
        raise ValueError("sequential baseline requires the two-level cost structure")
    cp, cu = inst.cost(0), inst.cost(inst.xi)
    integrated = optimize_interval(inst, bounds, grid)
    seq = sequential_interval(inst.lam, inst.xi, cp, cu, bounds)
    p_seq = average_profit(inst, seq.t_star, grid)
    r_hat = 100.0 * (integrated.g_star - p_seq) / p_seq
    return ComparisonResult(
        r_hat=r_hat,
        t_integrated=integrated.t_star,
        t_sequential=seq.t_star,
        p_integrated=integrated.g_star,
        p_sequential=p_seq,
    )
