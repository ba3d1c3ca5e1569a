"""Joint production control for a small fleet sharing one demand rate.

Each system deteriorates independently at its own base rate, while revenue
depends on the fleet's total production through a demand-penalty function.
The state space is the full product of deterioration levels, so fleets are
capped at three systems.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._kernels import backward_multi
from .errors import ActionSpaceTooLarge, EmptyHorizon, UnstableGrid
from .model import (
    CostFunction,
    DemandPenaltyRate,
    GridConfig,
    PowerRate,
    eval_rate,
)

MAX_ACTION_COMBOS = 1_000_000
MAX_SYSTEMS = 3


@dataclass(frozen=True)
class SystemSpec:
    """Base rate and deterioration function of one fleet member."""

    lam: float
    f: PowerRate

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("base rate must be positive")
        if not isinstance(self.f, PowerRate):
            raise ValueError("deterioration must be a power function with f(0) = 0")


@dataclass(frozen=True)
class MultiInstance:
    """Fleet problem: shared failure level, rate interval, costs, revenue."""

    systems: tuple
    xi: int
    s_max: float
    cost: CostFunction
    revenue: DemandPenaltyRate
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "systems", tuple(self.systems))
        if not 1 <= len(self.systems) <= MAX_SYSTEMS:
            raise ValueError(f"fleet size must be in [1, {MAX_SYSTEMS}]")
        if self.xi < 1:
            raise ValueError("failure level must be at least 1")
        if self.s_max <= 0:
            raise ValueError("maximum production rate must be positive")
        if not isinstance(self.revenue, DemandPenaltyRate):
            raise ValueError("fleet revenue must be a demand-penalty function")

    @property
    def n_systems(self) -> int:
        return len(self.systems)


def multi_revenue(s_vec, rev: DemandPenaltyRate) -> float:
    """Fleet revenue rate at the given per-system production rates."""
    total = float(np.sum(np.asarray(s_vec, dtype=float)))
    return float(rev(total))


def total_envelope_rate(inst: MultiInstance) -> float:
    """Sum of the worst-case deterioration rates across the fleet."""
    return sum(s.lam * eval_rate(s.f, inst.s_max) for s in inst.systems)


def default_multi_grid(
    inst: MultiInstance, dt: float = None, n_actions: int = None
) -> GridConfig:
    """dt from the joint stability bound; 41 actions per system for fleets."""
    if dt is None:
        dt = min(0.005, 0.5 / total_envelope_rate(inst))
    if n_actions is None:
        n_actions = 41 if inst.n_systems >= 2 else 101
    return GridConfig(dt=dt, n_actions=n_actions)


def validate_multi(inst: MultiInstance, grid: GridConfig) -> MultiInstance:
    if inst.horizon <= 0:
        raise EmptyHorizon(f"horizon must be positive, got {inst.horizon}")
    costs = inst.cost.costs
    if len(costs) != inst.xi + 1:
        raise ValueError(
            f"cost vector has {len(costs)} entries, expected xi+1={inst.xi + 1}"
        )
    for x in range(inst.xi):
        if costs[x + 1] < costs[x]:
            raise ValueError(f"cost decreases from level {x} to {x + 1}")
    if grid.n_actions ** inst.n_systems > MAX_ACTION_COMBOS:
        raise ActionSpaceTooLarge(
            f"{grid.n_actions}^{inst.n_systems} action combinations exceed "
            f"{MAX_ACTION_COMBOS}"
        )
    if grid.dt * total_envelope_rate(inst) >= 1.0:
        raise UnstableGrid(
            f"dt={grid.dt} violates dt * sum(lam_i * f_i(s_max)) < 1"
        )
    if round(inst.horizon / grid.dt) < 1:
        raise EmptyHorizon(
            f"horizon {inst.horizon} shorter than half a time step {grid.dt}"
        )
    return inst


@dataclass(eq=False)
class MultiSolution:
    """Value and per-system rates over the product state and time grid.

    values has shape (xi+1,) * n_systems + (n_steps+1,); policy adds a
    trailing per-system axis. Treat instances as immutable.
    """

    values: np.ndarray
    policy: np.ndarray
    dt: float
    instance: MultiInstance
    actions: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.values.shape[-1] - 1

    @property
    def action_step(self) -> float:
        return float(np.max(np.diff(self.actions)))

    def to_csv(self, path) -> None:
        """Write `x1,x2,n,value,s1,s2` rows for a two-system solution."""
        if self.instance.n_systems != 2:
            raise ValueError("CSV emission is defined for two-system solutions")
        xi = self.instance.xi
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x1,x2,n,value,s1,s2\n")
            for x1 in range(xi + 1):
                for x2 in range(xi + 1):
                    for n in range(self.n_steps + 1):
                        s1, s2 = self.policy[x1, x2, n]
                        fh.write(
                            f"{x1},{x2},{n},{self.values[x1, x2, n]:.9g},"
                            f"{s1:.9g},{s2:.9g}\n"
                        )


def solve_multi(inst: MultiInstance, grid: GridConfig) -> MultiSolution:
    """Backward recursion over the product state space.

    Each step maximizes fleet revenue minus the sum of per-system expected
    marginal deterioration losses over all action combinations, with
    failed systems forced off; ties resolve to the most balanced rate
    vector. The all-failed state keeps a constant value. For a single system this reproduces the single-system solver
    bit for bit on the same grid.
    """
    validate_multi(inst, grid)
    n_sys = inst.n_systems
    xi = inst.xi
    m = grid.n_actions
    actions = np.linspace(0.0, inst.s_max, m)
    digits = np.array(
        list(itertools.product(range(m), repeat=n_sys)), dtype=np.int64
    )
    total_rate = actions[digits].sum(axis=1)
    r_tot = np.asarray(inst.revenue(total_rate), dtype=float)
    f_combo = np.empty((m**n_sys, n_sys))
    for i, spec in enumerate(inst.systems):
        f_vals = np.asarray(spec.f(actions), dtype=float)
        f_combo[:, i] = f_vals[digits[:, i]]
    sq_norm = (actions[digits] ** 2).sum(axis=1)
    lams = np.array([spec.lam for spec in inst.systems])
    state_digits = np.array(
        list(itertools.product(range(xi + 1), repeat=n_sys)), dtype=np.int64
    )
    boundary = -inst.cost.as_array()[state_digits].sum(axis=1)
    n_steps = int(round(inst.horizon / grid.dt))
    values, policy_idx = backward_multi(
        boundary, r_tot, f_combo, sq_norm, digits, lams, grid.dt, n_steps, xi
    )
    policy = actions[digits[policy_idx]]
    shape = (xi + 1,) * n_sys
    return MultiSolution(
        values=values.reshape(shape + (n_steps + 1,)),
        policy=policy.reshape(shape + (n_steps + 1, n_sys)),
        dt=grid.dt,
        instance=inst,
        actions=actions,
    )
