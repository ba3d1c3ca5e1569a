"""Condition-based production control for stochastically deteriorating systems.

Library for computing optimal production policies between scheduled
maintenance moments (backward finite-difference solver), jointly
optimizing the maintenance interval, benchmarking against static and
sequential baselines, and evaluating Bayesian certainty-equivalent
policies under unit-to-unit base-rate variability by simulation.
"""

__version__ = "0.1.0"

from .bayes import CESchedule, GammaPrior, ce_estimate, ce_schedule, posterior_update
from .baseline import (
    FixedRateResult,
    erlang_cdf,
    expected_min_erlang,
    fixed_rate_profit,
    optimize_fixed_rate,
    relative_value,
)
from .hjb import MarginalGrid, SolutionGrid, marginals, solve
from .model import (
    CostFunction,
    DemandPenaltyRate,
    GridConfig,
    PowerRate,
    ProblemInstance,
    default_grid,
    eval_rate,
    validate_instance,
)
from .multi import (
    MultiInstance,
    MultiSolution,
    SystemSpec,
    default_multi_grid,
    multi_revenue,
    solve_multi,
)
from .sim import (
    RegretEstimate,
    RegretSamples,
    Trajectory,
    constant_rate_grid,
    estimate_regret,
    run_replications,
    simulate_ce,
    simulate_path,
)
from .structure import (
    BangBangVerdict,
    StructureReport,
    SwitchingCurve,
    check_bang_bang,
    extract_switching_curve,
    solve_auto,
    verify_structure,
)
from .tactical import (
    ComparisonResult,
    IntervalResult,
    SequentialResult,
    average_profit,
    compare_integrated_sequential,
    optimize_interval,
    profit_curve,
    sequential_interval,
)
