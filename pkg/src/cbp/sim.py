"""Monte Carlo evaluation of policies on controlled deterioration paths.

Paths are sampled by thinning: candidate shocks arrive at the constant
envelope rate true_lambda * f(s_max) and are accepted with probability
proportional to the deterioration rate the policy prescribes at the
candidate's state and time. Revenue and exposure are integrated per time
grid cell, holding the rate the policy prescribes at the cell start (the
cell-level error is first order in dt and is covered by the
solver-versus-simulator tests).

All randomness flows through numpy Generators seeded explicitly;
replication k of a run with seed s uses the substream [s, k, ...], so
serial and parallel execution produce identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import structure
from .bayes import GammaPrior, ce_estimate, ce_schedule
from .errors import EnvelopeViolated, NonPositiveOracleMean
from .hjb import SolutionGrid, bang_bang_actions, solve
from .model import (
    GridConfig,
    ProblemInstance,
    default_grid,
    eval_rate,
    validate_instance,
)


@dataclass
class Trajectory:
    """One simulated interval: shocks, per-cell applied rates, and profit.

    events holds (elapsed time, new level) per accepted shock;
    applied_rate[j] is the production rate used in elapsed cell j; usage
    is the accumulated deterioration-function exposure, the quantity the
    Bayesian update conditions on. rate_estimates records the sequence of
    base-rate estimates of a certainty-equivalent run (empty otherwise).
    """

    events: tuple
    applied_rate: np.ndarray
    revenue: float
    maintenance_cost: float
    profit: float
    usage: float
    final_level: int
    rate_estimates: tuple = ()


def constant_rate_grid(
    inst: ProblemInstance, s: float, grid: GridConfig
) -> SolutionGrid:
    """Policy container that applies rate s at every non-failed state.

    Used to simulate static policies; the value entries just repeat the
    boundary costs and carry no meaning.
    """
    validate_instance(inst, grid)
    if s < 0 or s > inst.s_max * (1 + 1e-12):
        raise ValueError(f"rate {s} outside [0, {inst.s_max}]")
    n_steps = int(round(inst.horizon / grid.dt))
    policy = np.full((inst.xi + 1, n_steps + 1), float(s))
    policy[inst.xi, :] = 0.0
    values = np.repeat(-inst.cost.as_array()[:, None], n_steps + 1, axis=1)
    return SolutionGrid(
        values=values,
        policy=policy,
        dt=grid.dt,
        instance=inst,
        actions=np.array([0.0, inst.s_max]),
    )


def _cell_tables(sol: SolutionGrid):
    """Per-cell revenue/exposure cumulative sums and the policy's f values.

    rates_fwd[x, j] is the rate prescribed for elapsed cell j at level x;
    r_cum/f_cum are cumulative cell sums with a leading zero column, so a
    segment of cells [a, b) at level x accrues r_cum[x, b] - r_cum[x, a].
    """
    cached = getattr(sol, "_sim_tables", None)
    if cached is not None:
        return cached
    inst = sol.instance
    n = sol.n_steps
    rates_fwd = sol.policy[:, n:0:-1]
    r_cells = np.asarray(inst.r(rates_fwd), dtype=float) * sol.dt
    f_cells = np.asarray(inst.f(rates_fwd), dtype=float) * sol.dt
    zero = np.zeros((rates_fwd.shape[0], 1))
    r_cum = np.concatenate([zero, np.cumsum(r_cells, axis=1)], axis=1)
    f_cum = np.concatenate([zero, np.cumsum(f_cells, axis=1)], axis=1)
    f_policy = np.asarray(inst.f(sol.policy), dtype=float)
    tables = (rates_fwd, r_cum, f_cum, f_policy)
    sol._sim_tables = tables
    return tables


def _walk_cells(
    sol, true_lambda, lam_max, x, cell_lo, cell_hi, times, accept_us, applied
):
    """Thin candidates inside cells [cell_lo, cell_hi) under one policy.

    Returns the end level and the revenue, exposure, and events accrued.
    Candidate times must already be restricted to the cell range.
    """
    rates_fwd, r_cum, f_cum, f_policy = _cell_tables(sol)
    inst = sol.instance
    horizon = sol.grid_horizon
    revenue = 0.0
    usage = 0.0
    events = []
    seg_start = cell_lo
    for tau, u in zip(times, accept_us):
        n_idx = sol.time_index(horizon - tau)
        p_accept = true_lambda * f_policy[x, n_idx] / lam_max
        if p_accept > 1.0 + 1e-9:
            raise EnvelopeViolated(
                f"acceptance probability {p_accept} above one at time {tau}"
            )
        if u < p_accept and x < inst.xi:
            cut = min(int(tau // sol.dt) + 1, cell_hi)
            revenue += r_cum[x, cut] - r_cum[x, seg_start]
            usage += f_cum[x, cut] - f_cum[x, seg_start]
            applied[seg_start:cut] = rates_fwd[x, seg_start:cut]
            seg_start = cut
            x += 1
            events.append((float(tau), x))
    revenue += r_cum[x, cell_hi] - r_cum[x, seg_start]
    usage += f_cum[x, cell_hi] - f_cum[x, seg_start]
    applied[seg_start:cell_hi] = rates_fwd[x, seg_start:cell_hi]
    return x, revenue, usage, events


def _candidates(rng, lam_max, horizon):
    n_cand = rng.poisson(lam_max * horizon) if lam_max > 0 else 0
    times = np.sort(rng.uniform(0.0, horizon, n_cand))
    accept_us = rng.random(n_cand)
    return times, accept_us


def simulate_path(policy: SolutionGrid, true_lambda: float, seed) -> Trajectory:
    """Simulate one interval under a fixed policy grid and base rate.

    The policy need not have been solved at the true base rate. Identical
    seeds give bit-identical trajectories.
    """
    inst = policy.instance
    lam_max = true_lambda * eval_rate(inst.f, inst.s_max)
    rng = np.random.default_rng(seed)
    times, accept_us = _candidates(rng, lam_max, policy.grid_horizon)
    applied = np.empty(policy.n_steps)
    x, revenue, usage, events = _walk_cells(
        policy, true_lambda, lam_max, 0, 0, policy.n_steps, times, accept_us, applied
    )
    cost = inst.cost(x)
    return Trajectory(
        events=tuple(events),
        applied_rate=applied,
        revenue=revenue,
        maintenance_cost=cost,
        profit=revenue - cost,
        usage=usage,
        final_level=x,
    )


def simulate_ce(
    inst_template: ProblemInstance,
    prior: GammaPrior,
    true_lambda: float,
    n_opt: int,
    seed,
    grid: GridConfig = None,
    solve_fn: Optional[Callable[[float], SolutionGrid]] = None,
) -> Trajectory:
    """Simulate one interval under the certainty-equivalent policy.

    Phase 0 runs the policy solved at the prior mean; at each of the n_opt
    equally spaced epochs the base-rate estimate is refreshed from the
    observed shock count and accumulated exposure and the policy is
    re-solved at the new estimate (on the full horizon; it is read at the
    true remaining time). The template's own base rate is ignored.
    solve_fn overrides how estimates map to policy grids.
    """
    if grid is None:
        grid = default_grid(inst_template.with_lambda(prior.mean))
    if solve_fn is None:
        actions = None
        if structure.check_bang_bang(inst_template).is_bang_bang:
            actions = bang_bang_actions(inst_template)

        def solve_fn(lam_hat):
            return solve(inst_template.with_lambda(lam_hat), grid, actions=actions)

    horizon = inst_template.horizon
    n_cells = int(round(horizon / grid.dt))
    schedule = ce_schedule(horizon, n_opt)
    edges = [0]
    for t_epoch in schedule.epochs:
        edges.append(int(round(t_epoch / grid.dt)))
    edges.append(n_cells)
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("re-optimization phases must span at least one grid cell")

    lam_max = true_lambda * eval_rate(inst_template.f, inst_template.s_max)
    rng = np.random.default_rng(seed)
    grid_horizon = n_cells * grid.dt
    times, accept_us = _candidates(rng, lam_max, grid_horizon)

    applied = np.empty(n_cells)
    x = 0
    revenue = 0.0
    usage = 0.0
    events = []
    lam_hat = prior.mean
    estimates = [lam_hat]
    cut_idx = np.searchsorted(times, np.asarray(edges[1:-1]) * grid.dt)
    phase_slices = np.split(np.arange(times.size), cut_idx)
    for p, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        pol = solve_fn(lam_hat)
        idx = phase_slices[p]
        x, rev_p, use_p, ev_p = _walk_cells(
            pol, true_lambda, lam_max, x, lo, hi, times[idx], accept_us[idx], applied
        )
        revenue += rev_p
        usage += use_p
        events.extend(ev_p)
        if p + 1 < len(edges) - 1:
            lam_hat = ce_estimate(prior, x, usage)
            estimates.append(lam_hat)
    cost = inst_template.cost(x)
    return Trajectory(
        events=tuple(events),
        applied_rate=applied,
        revenue=revenue,
        maintenance_cost=cost,
        profit=revenue - cost,
        usage=usage,
        final_level=x,
        rate_estimates=tuple(estimates),
    )


@dataclass(frozen=True)
class RegretEstimate:
    """Percent profit loss of the learning policy against the informed one."""

    mean_regret: float
    ci_halfwidth: float
    reps: int
    oracle_mean: float
    ce_mean: float


@dataclass(frozen=True)
class RegretSamples:
    """Per-replication draws: true rate, informed value, learning profit."""

    lam_stars: np.ndarray
    oracle_values: np.ndarray
    ce_profits: np.ndarray


def run_replications(
    inst_template: ProblemInstance,
    prior: GammaPrior,
    n_opt: int = 0,
    reps: int = 2000,
    seed: int = 0,
    grid: GridConfig = None,
    oracle: str = "analytic",
    first_rep: int = 0,
) -> RegretSamples:
    """Run independent replications of the regret experiment.

    Replication k draws the true base rate from the prior by inverse CDF
    on substream [seed, k, 0] (so runs with different priors stay coupled
    through common uniforms), takes the informed policy's value at that
    rate (analytic by default, or a simulated path with
    oracle="simulated"), and simulates one certainty-equivalent path on
    substream [seed, k, 1]. Extreme rate draws are kept, not truncated.
    """
    if oracle not in ("analytic", "simulated"):
        raise ValueError(f"unknown oracle mode {oracle!r}")
    if grid is None:
        grid = default_grid(inst_template.with_lambda(prior.mean))
    actions = None
    if structure.check_bang_bang(inst_template).is_bang_bang:
        actions = bang_bang_actions(inst_template)

    def solve_at(lam):
        return solve(inst_template.with_lambda(lam), grid, actions=actions)

    phase0 = solve_at(prior.mean)

    def solve_fn(lam_hat):
        return phase0 if lam_hat == prior.mean else solve_at(lam_hat)

    lam_stars = np.empty(reps)
    oracle_vals = np.empty(reps)
    ce_profits = np.empty(reps)
    for i in range(reps):
        k = first_rep + i
        u = np.random.default_rng([seed, k, 0]).random()
        lam_star = float(stats.gamma.ppf(u, a=prior.alpha, scale=1.0 / prior.beta))
        informed = solve_at(lam_star)
        if oracle == "analytic":
            oracle_vals[i] = informed.values[0, -1]
        else:
            oracle_vals[i] = simulate_path(informed, lam_star, [seed, k, 2]).profit
        traj = simulate_ce(
            inst_template,
            prior,
            lam_star,
            n_opt,
            [seed, k, 1],
            grid=grid,
            solve_fn=solve_fn,
        )
        lam_stars[i] = lam_star
        ce_profits[i] = traj.profit
    return RegretSamples(
        lam_stars=lam_stars, oracle_values=oracle_vals, ce_profits=ce_profits
    )


def estimate_regret(
    inst_template: ProblemInstance,
    prior: GammaPrior,
    n_opt: int = 0,
    reps: int = 2000,
    seed: int = 0,
    grid: GridConfig = None,
    oracle: str = "analytic",
    ci_target: float = None,
    max_reps: int = 100_000,
    samples: RegretSamples = None,
) -> RegretEstimate:
    """Estimate mean regret of the certainty-equivalent policy.

    Aggregates run_replications; the 95% half-width of the regret ratio
    comes from the delta method. When ci_target is set, replications
    double until both profit means have relative half-widths below it or
    max_reps is reached. Precomputed samples can be passed through.
    """
    if reps < 2:
        raise ValueError("need at least two replications")
    if grid is None:
        grid = default_grid(inst_template.with_lambda(prior.mean))
    if samples is None:
        samples = run_replications(
            inst_template, prior, n_opt, reps, seed, grid, oracle
        )
    o = samples.oracle_values
    c = samples.ce_profits
    while ci_target is not None and len(o) < max_reps:
        n = len(o)
        half_o = 1.96 * o.std(ddof=1) / math.sqrt(n)
        half_c = 1.96 * c.std(ddof=1) / math.sqrt(n)
        if half_o <= ci_target * abs(o.mean()) and half_c <= ci_target * abs(c.mean()):
            break
        extra = min(n, max_reps - n)
        more = run_replications(
            inst_template, prior, n_opt, extra, seed, grid, oracle, first_rep=n
        )
        o = np.concatenate([o, more.oracle_values])
        c = np.concatenate([c, more.ce_profits])
    o_mean = float(o.mean())
    c_mean = float(c.mean())
    if o_mean <= 0:
        raise NonPositiveOracleMean(
            f"informed-policy mean profit {o_mean:.6g} is nonpositive"
        )
    # Delta method for the ratio of means c_mean / o_mean.
    n = len(o)
    cov = np.cov(c, o, ddof=1)
    var_ratio = (
        cov[0, 0] / o_mean**2
        - 2.0 * cov[0, 1] * c_mean / o_mean**3
        + cov[1, 1] * c_mean**2 / o_mean**4
    ) / n
    ci_halfwidth = 100.0 * 1.96 * math.sqrt(max(var_ratio, 0.0))
    return RegretEstimate(
        mean_regret=100.0 * (o_mean - c_mean) / o_mean,
        ci_halfwidth=ci_halfwidth,
        reps=n,
        oracle_mean=o_mean,
        ce_mean=c_mean,
    )
