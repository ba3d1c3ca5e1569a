"""JSON configuration files: instance, grid, prior, fleet, and sweep keys.

Documented schema (single-system commands):

    {
      "lambda": 1.0, "xi": 10, "s_max": 1.0, "T": 15.0,
      "f": {"family": "power", "coeff": 1.0, "exponent": 2.0},
      "r": {"family": "power", "coeff": 1.0, "exponent": 0.5}
           or {"family": "demand_penalty", "b": 0.0, "p": 1.0, "D": 1.5},
      "cost": {"cp": 1.0, "cu": 5.0} or {"vector": [1.0, ..., 5.0]},
      "dt": 0.005, "n_actions": 101,            # optional grid overrides
      "bounds": [0.5, 30.0],                    # tactical search bounds
      "prior": {"mean": 1.0, "cv": 1.0}         # or {"alpha": .., "beta": ..}
      "n_opt": 0, "reps": 2000, "seed": 1,      # simulation settings
      "sweep": {"lambda": [...], "xi": [...]},  # sweep axes
      "metric": "baseline"                      # or "tactical"
    }

Fleet commands replace "lambda"/"f"/"r" with:

    "systems": [{"lambda": 1.0, "f": {...}}, ...],
    "revenue": {"b": 0.0, "p": 1.0, "D": 1.5}

Sweep axes may reference: lambda, xi, T, s_max, cp, cu, gamma, nu (the last
two set the power exponents of f and r). CLI flags override file keys.
"""

from __future__ import annotations

import copy
import json
from typing import Optional

from .bayes import GammaPrior
from .errors import ConfigError
from .model import (
    CostFunction,
    DemandPenaltyRate,
    GridConfig,
    PowerRate,
    ProblemInstance,
    default_grid,
)
from .multi import MultiInstance, SystemSpec, default_multi_grid

SWEEP_AXES = ("lambda", "xi", "T", "s_max", "cp", "cu", "gamma", "nu")


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _require(cfg: dict, key: str, context: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{context} is missing required key '{key}'")
    return cfg[key]


def rate_from_config(d: dict, key: str):
    family = _require(d, "family", f"'{key}'")
    try:
        if family == "power":
            return PowerRate(
                coeff=float(_require(d, "coeff", f"'{key}'")),
                exponent=float(_require(d, "exponent", f"'{key}'")),
            )
        if family == "demand_penalty":
            return DemandPenaltyRate(
                bonus=float(_require(d, "b", f"'{key}'")),
                penalty=float(_require(d, "p", f"'{key}'")),
                demand=float(_require(d, "D", f"'{key}'")),
            )
    except ValueError as exc:
        raise ConfigError(f"'{key}': {exc}")
    raise ConfigError(f"'{key}': unknown family '{family}'")


def cost_from_config(d: dict, xi: int) -> CostFunction:
    try:
        if "vector" in d:
            return CostFunction(costs=tuple(float(c) for c in d["vector"]))
        return CostFunction.two_level(
            float(_require(d, "cp", "'cost'")), float(_require(d, "cu", "'cost'")), xi
        )
    except ValueError as exc:
        raise ConfigError(f"'cost': {exc}")


def instance_from_config(cfg: dict) -> ProblemInstance:
    xi = int(_require(cfg, "xi"))
    try:
        return ProblemInstance(
            lam=float(_require(cfg, "lambda")),
            xi=xi,
            s_max=float(_require(cfg, "s_max")),
            f=rate_from_config(_require(cfg, "f"), "f"),
            r=rate_from_config(_require(cfg, "r"), "r"),
            cost=cost_from_config(_require(cfg, "cost"), xi),
            horizon=float(_require(cfg, "T")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def grid_from_config(
    cfg: dict,
    inst: ProblemInstance,
    dt_override: Optional[float] = None,
    actions_override: Optional[int] = None,
) -> GridConfig:
    dt = dt_override if dt_override is not None else cfg.get("dt")
    n_actions = (
        actions_override if actions_override is not None else cfg.get("n_actions", 101)
    )
    try:
        return default_grid(inst, dt=dt, n_actions=int(n_actions))
    except ValueError as exc:
        raise ConfigError(str(exc))


def prior_from_config(cfg: dict) -> GammaPrior:
    d = _require(cfg, "prior")
    try:
        if "mean" in d or "cv" in d:
            return GammaPrior.from_mean_cv(
                float(_require(d, "mean", "'prior'")), float(_require(d, "cv", "'prior'"))
            )
        return GammaPrior(
            alpha=float(_require(d, "alpha", "'prior'")),
            beta=float(_require(d, "beta", "'prior'")),
        )
    except ValueError as exc:
        raise ConfigError(f"'prior': {exc}")


def multi_from_config(cfg: dict) -> MultiInstance:
    systems_cfg = _require(cfg, "systems")
    if not isinstance(systems_cfg, list) or not systems_cfg:
        raise ConfigError("'systems' must be a nonempty list")
    xi = int(_require(cfg, "xi"))
    rev = _require(cfg, "revenue")
    try:
        systems = tuple(
            SystemSpec(
                lam=float(_require(d, "lambda", f"'systems[{i}]'")),
                f=rate_from_config(_require(d, "f", f"'systems[{i}]'"), f"systems[{i}].f"),
            )
            for i, d in enumerate(systems_cfg)
        )
        return MultiInstance(
            systems=systems,
            xi=xi,
            s_max=float(_require(cfg, "s_max")),
            cost=cost_from_config(_require(cfg, "cost"), xi),
            revenue=DemandPenaltyRate(
                bonus=float(_require(rev, "b", "'revenue'")),
                penalty=float(_require(rev, "p", "'revenue'")),
                demand=float(_require(rev, "D", "'revenue'")),
            ),
            horizon=float(_require(cfg, "T")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def multi_grid_from_config(
    cfg: dict,
    inst: MultiInstance,
    dt_override: Optional[float] = None,
    actions_override: Optional[int] = None,
) -> GridConfig:
    dt = dt_override if dt_override is not None else cfg.get("dt")
    n_actions = (
        actions_override if actions_override is not None else cfg.get("n_actions")
    )
    try:
        return default_multi_grid(
            inst, dt=dt, n_actions=None if n_actions is None else int(n_actions)
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def sweep_axes_from_config(cfg: dict) -> dict:
    axes = _require(cfg, "sweep")
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("'sweep' must map parameter names to value lists")
    for key, values in axes.items():
        if key not in SWEEP_AXES:
            raise ConfigError(
                f"'sweep' axis '{key}' not supported; choose from {SWEEP_AXES}"
            )
        if not isinstance(values, list) or not values:
            raise ConfigError(f"'sweep' axis '{key}' must list at least one value")
    return axes


def apply_axis(cfg: dict, key: str, value) -> dict:
    """New config dict with one sweep axis pinned to a value."""
    out = copy.deepcopy(cfg)
    if key == "lambda":
        out["lambda"] = value
    elif key == "xi":
        out["xi"] = int(value)
        if "cost" in out and "vector" in out.get("cost", {}):
            raise ConfigError("sweeping 'xi' requires the cp/cu cost form")
    elif key == "T":
        out["T"] = value
    elif key == "s_max":
        out["s_max"] = value
    elif key in ("cp", "cu"):
        cost = out.get("cost")
        if not isinstance(cost, dict) or "vector" in cost:
            raise ConfigError(f"sweeping '{key}' requires the cp/cu cost form")
        cost[key] = value
    elif key in ("gamma", "nu"):
        target = out.get("f" if key == "gamma" else "r")
        if not isinstance(target, dict) or target.get("family") != "power":
            raise ConfigError(f"sweeping '{key}' requires a power-family function")
        target["exponent"] = value
    else:
        raise ConfigError(f"unknown sweep axis '{key}'")
    return out
