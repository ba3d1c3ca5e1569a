import numpy as np
import pytest

from cbp import (
    CostFunction,
    GridConfig,
    PowerRate,
    ProblemInstance,
    default_grid,
    solve,
)


def make_power_instance(
    lam=1.0, xi=10, s_max=1.0, gamma=2.0, nu=0.5, cp=1.0, cu=5.0, horizon=15.0
):
    """Two-level-cost instance with power revenue s**nu and wear s**gamma."""
    return ProblemInstance(
        lam=lam,
        xi=xi,
        s_max=s_max,
        f=PowerRate(1.0, gamma),
        r=PowerRate(1.0, nu),
        cost=CostFunction.two_level(cp, cu, xi),
        horizon=horizon,
    )


def make_base_case(lam=1.0, xi=14, gamma=1.0, nu=1.0, cp=2.0, horizon=10.0):
    """The comparative-statics base family: cu=10, rates from [0, 2]."""
    return make_power_instance(
        lam=lam, xi=xi, s_max=2.0, gamma=gamma, nu=nu, cp=cp, cu=10.0, horizon=horizon
    )


def random_valid_instance(rng):
    """Random instance satisfying every validation invariant."""
    xi = int(rng.integers(3, 10))
    cp = float(rng.uniform(0.3, 3.0))
    cu = cp + float(rng.uniform(0.5, 8.0))
    return make_power_instance(
        lam=float(rng.uniform(0.4, 2.0)),
        xi=xi,
        s_max=float(rng.uniform(0.5, 2.0)),
        gamma=float(rng.uniform(0.5, 2.0)),
        nu=float(rng.uniform(0.5, 2.0)),
        cp=cp,
        cu=cu,
        horizon=float(rng.uniform(2.0, 8.0)),
    )


@pytest.fixture(scope="session")
def wear_instance():
    """Concave revenue, quadratic wear; the interior-policy workhorse."""
    return make_power_instance()


@pytest.fixture(scope="session")
def wear_solution(wear_instance):
    return solve(wear_instance, default_grid(wear_instance))


@pytest.fixture(scope="session")
def onoff_instance():
    """Convex revenue, concave wear; extreme-rate policies are optimal."""
    return make_power_instance(gamma=0.5, nu=2.0)
