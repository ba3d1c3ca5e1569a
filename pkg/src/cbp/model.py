"""Problem instances: rate functions, maintenance costs, grids, validation.

All types here are immutable after construction and safe to share across
threads. Deterioration is restricted to the power family (it must vanish
when production is off); revenue may be a power function or a
demand-penalty function. Both families are increasing by construction, so
decreasing revenue specifications cannot be expressed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DeteriorationNotZeroAtOff,
    EmptyHorizon,
    NegativeRateInput,
    NonConvexCost,
    NonIncreasingCost,
    UnstableGrid,
)

_CONVEXITY_TOL = 1e-12


@dataclass(frozen=True)
class PowerRate:
    """Rate function coeff * s**exponent with coeff, exponent > 0."""

    coeff: float
    exponent: float

    def __post_init__(self):
        if self.coeff <= 0:
            raise ValueError("power rate coefficient must be positive")
        if self.exponent <= 0:
            raise ValueError("power rate exponent must be positive")

    def __call__(self, s):
        return self.coeff * np.asarray(s, dtype=float) ** self.exponent


@dataclass(frozen=True)
class DemandPenaltyRate:
    """Revenue bonus * (s - demand)+ - penalty * (demand - s)+.

    Increasing and continuous for bonus, penalty >= 0, with value
    -penalty * demand <= 0 at s = 0.
    """

    bonus: float
    penalty: float
    demand: float

    def __post_init__(self):
        if self.bonus < 0 or self.penalty < 0:
            raise ValueError("bonus and penalty rates must be nonnegative")
        if self.demand <= 0:
            raise ValueError("demand rate must be positive")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        surplus = np.maximum(s - self.demand, 0.0)
        shortfall = np.maximum(self.demand - s, 0.0)
        return self.bonus * surplus - self.penalty * shortfall


RateFunction = Union[PowerRate, DemandPenaltyRate]


def eval_rate(fn: RateFunction, s: float) -> float:
    """Evaluate a rate function at production rate s >= 0."""
    if s < 0:
        raise NegativeRateInput(f"production rate must be nonnegative, got {s}")
    return float(fn(s))


@dataclass(frozen=True)
class CostFunction:
    """Maintenance cost by deterioration level, costs[x] for x in 0..xi."""

    costs: tuple

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        if len(self.costs) < 2:
            raise ValueError("cost vector needs at least levels 0 and xi")
        if any(c < 0 for c in self.costs):
            raise ValueError("maintenance costs must be nonnegative")

    @classmethod
    def two_level(cls, cp: float, cu: float, xi: int) -> "CostFunction":
        """Canonical structure: preventive cost cp below xi, corrective cu at xi."""
        return cls(costs=(cp,) * xi + (cu,))

    @property
    def xi(self) -> int:
        return len(self.costs) - 1

    @property
    def is_two_level(self) -> bool:
        head = self.costs[:-1]
        return all(c == head[0] for c in head)

    def __call__(self, x: int) -> float:
        return self.costs[x]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.costs, dtype=float)


@dataclass(frozen=True)
class ProblemInstance:
    """Single-system control problem over one maintenance interval.

    lam is the base deterioration rate (shocks per time unit at unit
    deterioration-function value), xi the failure level, s_max the upper
    end of the production-rate interval, f/r the deterioration and revenue
    functions, cost the maintenance cost schedule, and horizon the time
    until the scheduled maintenance moment.
    """

    lam: float
    xi: int
    s_max: float
    f: RateFunction
    r: RateFunction
    cost: CostFunction
    horizon: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("base rate must be positive")
        if self.xi < 1:
            raise ValueError("failure level must be at least 1")
        if self.s_max <= 0:
            raise ValueError("maximum production rate must be positive")

    def with_lambda(self, lam: float) -> "ProblemInstance":
        return dataclasses.replace(self, lam=lam)

    def with_horizon(self, horizon: float) -> "ProblemInstance":
        return dataclasses.replace(self, horizon=horizon)


@dataclass(frozen=True)
class GridConfig:
    """Discretization: time step dt and size of the uniform action grid."""

    dt: float
    n_actions: int = 101

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("time step must be positive")
        if self.n_actions < 2:
            raise ValueError("action grid needs at least two points")


def stability_bound(inst: ProblemInstance) -> float:
    """Largest dt for which dt * lam * f(s_max) stays below 1."""
    return 1.0 / (inst.lam * eval_rate(inst.f, inst.s_max))


def default_grid(inst: ProblemInstance, dt: float = None, n_actions: int = 101) -> GridConfig:
    """Grid with dt = min(0.005, half the stability bound) unless overridden."""
    if dt is None:
        dt = min(0.005, 0.5 * stability_bound(inst))
    return GridConfig(dt=dt, n_actions=n_actions)


def validate_instance(inst: ProblemInstance, grid: GridConfig) -> ProblemInstance:
    """Check all cross-field invariants; return the instance unchanged.

    Raises NonIncreasingCost / NonConvexCost for a bad cost schedule,
    DeteriorationNotZeroAtOff if f is not a power function (so f(0) != 0
    cannot be ruled out), UnstableGrid if dt * lam * f(s_max) >= 1 and
    EmptyHorizon if the horizon admits no time step.
    """
    if inst.horizon <= 0:
        raise EmptyHorizon(f"horizon must be positive, got {inst.horizon}")
    costs = inst.cost.costs
    if len(costs) != inst.xi + 1:
        raise ValueError(
            f"cost vector has {len(costs)} entries, expected xi+1={inst.xi + 1}"
        )
    for x in range(inst.xi):
        if costs[x + 1] < costs[x]:
            raise NonIncreasingCost(f"cost decreases from level {x} to {x + 1}")
    for x in range(inst.xi - 1):
        if (costs[x + 2] - costs[x + 1]) - (costs[x + 1] - costs[x]) < -_CONVEXITY_TOL:
            raise NonConvexCost(f"cost increments decrease at level {x + 1}")
    if not isinstance(inst.f, PowerRate):
        raise DeteriorationNotZeroAtOff(
            "deterioration function must be a power function with f(0) = 0"
        )
    if grid.dt * inst.lam * eval_rate(inst.f, inst.s_max) >= 1.0:
        raise UnstableGrid(
            f"dt={grid.dt} violates dt * lam * f(s_max) < 1 "
            f"(bound {stability_bound(inst):.6g})"
        )
    if round(inst.horizon / grid.dt) < 1:
        raise EmptyHorizon(
            f"horizon {inst.horizon} shorter than half a time step {grid.dt}"
        )
    return inst
