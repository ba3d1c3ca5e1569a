"""Gamma belief over the unknown base rate and certainty-equivalent plumbing.

The deterioration count observed under a known production path is Poisson
with mean lam * integral of f(s_u) du, so the Gamma family is conjugate:
shape absorbs the count, rate absorbs the accumulated exposure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GammaPrior:
    """Gamma(shape alpha, rate beta) belief over the base rate."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("Gamma parameters must be positive")

    @classmethod
    def from_mean_cv(cls, mean: float, cv: float) -> "GammaPrior":
        """Belief with the given mean and coefficient of variation."""
        if mean <= 0 or cv <= 0:
            raise ValueError("mean and cv must be positive")
        alpha = 1.0 / cv**2
        return cls(alpha=alpha, beta=alpha / mean)

    @property
    def mean(self) -> float:
        return self.alpha / self.beta

    @property
    def cv(self) -> float:
        return 1.0 / math.sqrt(self.alpha)


def posterior_update(prior: GammaPrior, y: int, usage: float) -> GammaPrior:
    """Posterior after observing y shocks under accumulated exposure usage."""
    if y < 0 or y != int(y):
        raise ValueError(f"shock count must be a nonnegative integer, got {y}")
    if usage < 0:
        raise ValueError(f"accumulated exposure must be nonnegative, got {usage}")
    return GammaPrior(alpha=prior.alpha + y, beta=prior.beta + usage)


def ce_estimate(prior: GammaPrior, y: int, usage: float) -> float:
    """Posterior-mean point estimate of the base rate."""
    post = posterior_update(prior, y, usage)
    return post.mean


@dataclass(frozen=True)
class CESchedule:
    """Re-optimization epochs splitting the horizon into equal phases."""

    n_opt: int
    epochs: tuple

    def __post_init__(self):
        if self.n_opt != len(self.epochs):
            raise ValueError("epoch count must equal n_opt")


def ce_schedule(horizon: float, n_opt: int) -> CESchedule:
    """Equally spaced elapsed-time epochs j * T / (n_opt + 1), j = 1..n_opt."""
    if n_opt < 0:
        raise ValueError("number of re-optimizations must be nonnegative")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    epochs = tuple(j * horizon / (n_opt + 1) for j in range(1, n_opt + 1))
    return CESchedule(n_opt=n_opt, epochs=epochs)
