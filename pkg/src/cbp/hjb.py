"""Finite-difference solver for the single-system optimality equation.

Time is indexed backward: column n of a solved grid holds the quantities
at remaining time n * dt, so column 0 is the maintenance moment and column
N = round(horizon / dt) is the start of the planning interval. Forward-time
consumers translate via t_remaining = horizon - t_elapsed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import backward_single
from .errors import OutOfRange
from .model import GridConfig, ProblemInstance, validate_instance


@dataclass(eq=False)
class SolutionGrid:
    """Optimal value and policy on the (deterioration, remaining time) grid.

    values[x, n] is the optimal expected profit and policy[x, n] the
    optimal production rate at deterioration level x with n * dt time
    remaining. Treat instances as immutable.
    """

    values: np.ndarray
    policy: np.ndarray
    dt: float
    instance: ProblemInstance
    actions: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.values.shape[1] - 1

    @property
    def grid_horizon(self) -> float:
        return self.n_steps * self.dt

    @property
    def action_step(self) -> float:
        """Largest gap between adjacent actions, the policy resolution."""
        return float(np.max(np.diff(self.actions)))

    def time_index(self, t: float) -> int:
        """Nearest grid index for remaining time t, ties rounding down."""
        if t < 0 or t > self.grid_horizon + 0.5 * self.dt:
            raise OutOfRange(f"remaining time {t} outside [0, {self.grid_horizon}]")
        return min(math.ceil(t / self.dt - 0.5), self.n_steps)

    def value_at(self, x: int, t: float) -> float:
        """Optimal expected profit at level x with remaining time t."""
        self._check_state(x)
        return float(self.values[x, self.time_index(t)])

    def policy_at(self, x: int, t: float) -> float:
        """Optimal production rate at level x with remaining time t."""
        self._check_state(x)
        return float(self.policy[x, self.time_index(t)])

    def _check_state(self, x: int) -> None:
        if not 0 <= x <= self.instance.xi:
            raise OutOfRange(f"deterioration level {x} outside [0, {self.instance.xi}]")

    def to_csv(self, path) -> None:
        """Write rows `x,n,t_remaining,value,policy` in x-major order."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,n,t_remaining,value,policy\n")
            for x in range(self.values.shape[0]):
                for n in range(self.values.shape[1]):
                    fh.write(
                        f"{x},{n},{n * self.dt:.9g},"
                        f"{self.values[x, n]:.9g},{self.policy[x, n]:.9g}\n"
                    )


@dataclass(frozen=True)
class MarginalGrid:
    """First and second differences of the value in the deterioration level.

    delta[x, n] = values[x, n] - values[x+1, n] is the marginal value of
    one unit less deterioration; delta2 is its first difference in x.
    """

    delta: np.ndarray
    delta2: np.ndarray


def uniform_actions(inst: ProblemInstance, n_actions: int) -> np.ndarray:
    return np.linspace(0.0, inst.s_max, n_actions)


def bang_bang_actions(inst: ProblemInstance) -> np.ndarray:
    return np.array([0.0, inst.s_max])


def solve(
    inst: ProblemInstance, grid: GridConfig, actions: np.ndarray = None
) -> SolutionGrid:
    """Solve the backward recursion over the full planning horizon.

    Each step applies
        values[x, n+1] = values[x, n]
            + dt * max_s [ r(s) - lam * f(s) * (values[x, n] - values[x+1, n]) ]
    for x below the failure level, with the failed level held constant and
    boundary values[x, 0] = -cost(x). Ties in the maximization resolve to
    the smallest action. `actions` overrides the uniform grid (it must be
    ascending and start at 0 so the failed system can be switched off).
    """
    validate_instance(inst, grid)
    if actions is None:
        actions = uniform_actions(inst, grid.n_actions)
    else:
        actions = np.asarray(actions, dtype=float)
        if actions.ndim != 1 or actions.size < 2 or actions[0] != 0.0:
            raise ValueError("actions must be a 1-D grid starting at 0")
        if np.any(np.diff(actions) <= 0) or actions[-1] > inst.s_max * (1 + 1e-12):
            raise ValueError("actions must be ascending and within [0, s_max]")
    r_vals = np.asarray(inst.r(actions), dtype=float)
    f_vals = np.asarray(inst.f(actions), dtype=float)
    boundary = -inst.cost.as_array()
    n_steps = int(round(inst.horizon / grid.dt))
    values, policy_idx = backward_single(
        boundary, r_vals, f_vals, inst.lam, grid.dt, n_steps
    )
    return SolutionGrid(
        values=values,
        policy=actions[policy_idx],
        dt=grid.dt,
        instance=inst,
        actions=actions,
    )


def marginals(sol: SolutionGrid) -> MarginalGrid:
    """Exact first and second value differences in the deterioration level."""
    delta = sol.values[:-1, :] - sol.values[1:, :]
    return MarginalGrid(delta=delta, delta2=delta[:-1, :] - delta[1:, :])
