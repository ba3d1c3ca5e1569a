"""Bang-bang detection, switching curves, and structural checks on solutions.

The bang-bang test is a sufficient-condition checker: a negative verdict
(`NotDetected`) is not a proof that the optimal policy uses interior
rates. The verdict never depends on the base rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import hjb
from .errors import IncompatibleGrids, NotBangBangSolution
from .model import DemandPenaltyRate, GridConfig, PowerRate, ProblemInstance

RATIO_GRID_POINTS = 10_001
RATIO_TOL = 1e-12

EQUAL_FUNCTIONS = "EqualFunctions"
POWER_EXPONENT_DOMINANCE = "PowerExponentDominance"
CONVEX_CONCAVE = "ConvexConcave"
RATIO_TEST_GRID = "RatioTestGrid"
NOT_DETECTED = "NotDetected"


@dataclass(frozen=True)
class BangBangVerdict:
    is_bang_bang: bool
    reason: str
    worst_ratio_gap: float


def _revenue_is_convex(r) -> bool:
    if isinstance(r, PowerRate):
        return r.exponent >= 1.0
    if isinstance(r, DemandPenaltyRate):
        # Piecewise linear with slope penalty below demand, bonus above.
        return r.bonus >= r.penalty
    return False


def check_bang_bang(inst: ProblemInstance) -> BangBangVerdict:
    """Decide whether extreme-rate policies are provably optimal.

    Analytic shortcuts (identical functions; power revenue exponent at
    least the power deterioration exponent; convex revenue with concave
    deterioration) are tried first, then the ratio condition
    r(s)/f(s) <= r(s_max)/f(s_max) is checked on an interior grid. The
    worst ratio gap over that grid is reported either way.
    """
    r, f = inst.r, inst.f
    s = np.linspace(0.0, inst.s_max, RATIO_GRID_POINTS + 2)[1:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.asarray(r(s), dtype=float) / np.asarray(f(s), dtype=float)
    ratio_end = float(r(inst.s_max)) / float(f(inst.s_max))
    worst_gap = float(np.min(ratio_end - ratio))

    reason = None
    if isinstance(r, PowerRate) and isinstance(f, PowerRate):
        if r == f:
            reason = EQUAL_FUNCTIONS
        elif r.exponent >= f.exponent:
            reason = POWER_EXPONENT_DOMINANCE
    if reason is None and isinstance(f, PowerRate) and f.exponent <= 1.0:
        if _revenue_is_convex(r):
            reason = CONVEX_CONCAVE
    if reason is None:
        if worst_gap >= -RATIO_TOL:
            reason = RATIO_TEST_GRID
        else:
            return BangBangVerdict(False, NOT_DETECTED, worst_gap)
    return BangBangVerdict(True, reason, worst_gap)


def solve_auto(
    inst: ProblemInstance, grid: GridConfig, actions: np.ndarray = None
) -> hjb.SolutionGrid:
    """Solve with the two-point action set whenever bang-bang is detected.

    The restriction is exact for the value: on a bang-bang instance the
    interior action-grid points never beat both extremes.
    """
    if actions is None and check_bang_bang(inst).is_bang_bang:
        actions = hjb.bang_bang_actions(inst)
    return hjb.solve(inst, grid, actions=actions)


@dataclass(frozen=True)
class SwitchingCurve:
    """threshold[n] = smallest level at which production is off at n * dt."""

    threshold: np.ndarray


def extract_switching_curve(sol: hjb.SolutionGrid) -> SwitchingCurve:
    """Read the off-threshold from a bang-bang solution.

    Requires every policy entry to be exactly 0 or s_max and the off
    region to be upward closed in the deterioration level.
    """
    s_max = sol.instance.s_max
    pol = sol.policy
    if not np.all((pol == 0.0) | (pol == s_max)):
        raise NotBangBangSolution("policy contains interior production rates")
    off = pol == 0.0
    threshold = np.argmax(off, axis=0)
    bad = ~np.all(
        off | (np.arange(pol.shape[0])[:, None] < threshold[None, :]), axis=0
    )
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0])
        raise NotBangBangSolution(
            f"production resumes above the off-threshold at time index {n}"
        )
    return SwitchingCurve(threshold=threshold)


@dataclass(frozen=True)
class PropertyCheck:
    """One verified inequality: worst residual (positive = violation)."""

    name: str
    passed: bool
    max_violation: float
    x: int
    n: int
    lam: float


@dataclass(frozen=True)
class StructureReport:
    checks: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"{'property':<28}{'pass':<6}{'max_violation':<16}x     n       lambda"]
        for c in self.checks:
            lines.append(
                f"{c.name:<28}{str(c.passed):<6}{c.max_violation:<16.6g}"
                f"{c.x:<6}{c.n:<8}{c.lam:g}"
            )
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("property,pass,max_violation,x,n,lambda\n")
            for c in self.checks:
                fh.write(
                    f"{c.name},{str(c.passed).lower()},{c.max_violation:.9g},"
                    f"{c.x},{c.n},{c.lam:.9g}\n"
                )


def _worst(residual: np.ndarray):
    """Largest residual and its (row, column) location."""
    idx = np.unravel_index(np.argmax(residual), residual.shape)
    return float(residual[idx]), int(idx[0]), int(idx[1])


def _check(name, residual, tol, lam) -> PropertyCheck:
    worst, x, n = _worst(residual)
    return PropertyCheck(name, worst <= tol, worst, x, n, lam)


def verify_structure(sols) -> StructureReport:
    """Verify the proved value and policy monotonicities on solved grids.

    All grids must agree on everything except the base rate. Value
    inequalities get a tolerance of 1e-6 times the value scale; policy
    inequalities get one action-grid cell of slack for argmax plateaus.
    With a single grid the cross-rate checks are skipped.
    """
    sols = sorted(sols, key=lambda s: s.instance.lam)
    ref = sols[0]
    for s in sols[1:]:
        same = (
            s.instance.with_lambda(ref.instance.lam) == ref.instance
            and s.dt == ref.dt
            and s.values.shape == ref.values.shape
            and np.array_equal(s.actions, ref.actions)
        )
        if not same:
            raise IncompatibleGrids("grids differ in more than the base rate")

    scale = max(1.0, max(float(np.max(np.abs(s.values))) for s in sols))
    tol = 1e-6 * scale
    pol_tol = ref.action_step + 1e-12

    checks = []
    for s in sols:
        lam = s.instance.lam
        v, p = s.values, s.policy
        delta = v[:-1, :] - v[1:, :]
        checks.append(_check("value_monotone_x", -delta, tol, lam))
        checks.append(_check("value_monotone_t", v[:, :-1] - v[:, 1:], tol, lam))
        checks.append(_check("value_concave_x", delta[:-1, :] - delta[1:, :], tol, lam))
        checks.append(
            _check("delta_increasing_t", delta[:, :-1] - delta[:, 1:], tol, lam)
        )
        dv = v[:, 1:] - v[:, :-1]
        checks.append(_check("value_concave_t", dv[:, 1:] - dv[:, :-1], tol, lam))
        checks.append(_check("policy_monotone_x", p[1:, :] - p[:-1, :], pol_tol, lam))
        checks.append(_check("policy_monotone_t", p[:, 1:] - p[:, :-1], pol_tol, lam))

    for lo, hi in zip(sols, sols[1:]):
        lam = hi.instance.lam
        checks.append(
            _check("value_monotone_lambda", hi.values - lo.values, tol, lam)
        )
        delta_lo = lo.values[:-1, :] - lo.values[1:, :]
        delta_hi = hi.values[:-1, :] - hi.values[1:, :]
        checks.append(
            _check("delta_submodular_lambda", delta_lo - delta_hi, tol, lam)
        )
        checks.append(
            _check("policy_monotone_lambda", hi.policy - lo.policy, pol_tol, lam)
        )
    return StructureReport(checks=tuple(checks))
