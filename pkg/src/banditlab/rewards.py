"""Reward models and their sufficient statistics.

Both models admit tiny sufficient statistics: the uniform model needs
only (n, min, max) because the likelihood of Uniform(a, b) depends on a
sample through its extremes, and the gaussian model needs (n, mean, css)
where css is the centered sum of squares.

Reward draws consume exactly one uniform from the generator and map it
through the inverse CDF.  That fixed one-uniform cost is what lets the
harness lay rounds out in constant-width blocks, so never swap these for
rejection or ziggurat samplers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import BanditInstance


def uniform_ab_from_ls(mu: float, sigma: float) -> tuple[float, float]:
    """Support endpoints of a uniform arm given (center, width)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return mu - sigma / 2.0, mu + sigma / 2.0


def uniform_ls_from_ab(a: float, b: float) -> tuple[float, float]:
    """(center, width) of Uniform(a, b)."""
    if not b > a:
        raise ValueError(f"need b > a, got a={a}, b={b}")
    return (a + b) / 2.0, b - a


@dataclass(frozen=True)
class UniformStats:
    n: int
    x_min: float
    x_max: float

    @classmethod
    def empty(cls) -> "UniformStats":
        return cls(n=0, x_min=math.inf, x_max=-math.inf)

    @property
    def mle_mu(self) -> float:
        if self.n < 1:
            raise ValueError("mle_mu undefined for empty stats")
        return (self.x_min + self.x_max) / 2.0

    @property
    def mle_sigma(self) -> float:
        if self.n < 1:
            raise ValueError("mle_sigma undefined for empty stats")
        return self.x_max - self.x_min


@dataclass(frozen=True)
class GaussianStats:
    n: int
    mean: float
    css: float

    @classmethod
    def empty(cls) -> "GaussianStats":
        return cls(n=0, mean=0.0, css=0.0)

    @property
    def mle_sigma(self) -> float:
        if self.n < 1:
            raise ValueError("mle_sigma undefined for empty stats")
        return math.sqrt(self.css / self.n)


def update_uniform_stats(stats: UniformStats, x: float) -> UniformStats:
    if not math.isfinite(x):
        raise ValueError(f"reward must be finite, got {x}")
    if stats.n == 0:
        return UniformStats(n=1, x_min=x, x_max=x)
    return UniformStats(
        n=stats.n + 1,
        x_min=min(stats.x_min, x),
        x_max=max(stats.x_max, x),
    )


def update_gaussian_stats(stats: GaussianStats, x: float) -> GaussianStats:
    """Welford update; keeps css accurate to ~1e-15 relative even when the
    mean dwarfs the spread, where the naive sum-of-squares form cancels."""
    if not math.isfinite(x):
        raise ValueError(f"reward must be finite, got {x}")
    n = stats.n + 1
    d = x - stats.mean
    mean = stats.mean + d / n
    css = stats.css + d * (x - mean)
    return GaussianStats(n=n, mean=mean, css=css)


def reward_from_uniform(instance: BanditInstance, arm_index: int, u: float) -> float:
    """Inverse-CDF reward transform shared by the scalar and batched paths."""
    arm = instance.arms[arm_index]
    if instance.model == "uniform":
        a, b = uniform_ab_from_ls(arm.mu, arm.sigma)
        return a + u * (b - a)
    return arm.mu + arm.sigma * float(special.ndtri(u))


def sample_reward(instance: BanditInstance, arm_index: int, rng: np.random.Generator) -> float:
    """Draw one reward; consumes exactly one uniform from `rng`."""
    if not 0 <= arm_index < instance.n_arms:
        raise ValueError(f"arm_index {arm_index} out of range for {instance.n_arms} arms")
    return reward_from_uniform(instance, arm_index, float(rng.random()))
