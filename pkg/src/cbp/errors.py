"""Exception types shared across the package."""


class CbpError(Exception):
    """Base class for all package-specific errors."""


class NonIncreasingCost(CbpError):
    """Maintenance cost vector decreases somewhere."""


class NonConvexCost(CbpError):
    """Maintenance cost increments decrease somewhere."""


class DeteriorationNotZeroAtOff(CbpError):
    """Deterioration function does not vanish when production is off."""


class UnstableGrid(CbpError):
    """Time step too coarse: dt * lambda * f(s_max) must stay below 1."""


class EmptyHorizon(CbpError):
    """Planning horizon is nonpositive or shorter than one time step."""


class NegativeRateInput(CbpError):
    """Production rate argument below zero."""


class RateOutOfRange(CbpError):
    """Production rate outside [0, s_max]."""


class OutOfRange(CbpError):
    """State or time query outside the solved grid."""


class NotBangBangSolution(CbpError):
    """Solution policy contains interior production rates."""


class IncompatibleGrids(CbpError):
    """Solution grids differ in more than the base rate."""


class InvalidCosts(CbpError):
    """Preventive cost must be strictly below corrective cost."""


class DegenerateBaseline(CbpError):
    """Fixed-rate baseline profit too close to zero for a relative metric."""


class NonPositiveOracleMean(CbpError):
    """Mean profit of the reference policy is nonpositive; regret undefined."""


class EnvelopeViolated(CbpError):
    """Thinning acceptance probability exceeded one."""


class ActionSpaceTooLarge(CbpError):
    """Joint action enumeration exceeds the configured budget."""


class ConfigError(CbpError):
    """Configuration file is missing keys or holds malformed values."""
