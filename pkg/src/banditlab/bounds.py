"""Closed-form KL infima and the asymptotic regret lower bound.

For a suboptimal arm with gap delta and scale sigma, the smallest KL
divergence to any model of the same family whose mean beats the optimum:

    uniform model    log(1 + 2 delta / sigma)
    gaussian model   0.5 log(1 + (delta / sigma)^2)

The asymptotic lower bound on expected regret is then
coefficient * log t with coefficient = sum over suboptimal arms of
delta_i / klinf_i.  Arms tied with the optimum contribute nothing and are
excluded (their term would be 0/0); the curve is the bare asymptote with
no lower-order slack.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .core import BanditInstance, gap_vector


def klinf_uniform(delta: float, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    return math.log1p(2.0 * delta / sigma)


def klinf_gaussian(delta: float, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    return 0.5 * math.log1p((delta / sigma) ** 2)


_KLINF = {"uniform": klinf_uniform, "gaussian": klinf_gaussian}


@dataclass(frozen=True)
class LowerBoundCurve:
    t_grid: tuple[int, ...]
    values: tuple[float, ...]


def lb_coefficient(instance: BanditInstance) -> float:
    """Sum of delta_i / klinf(delta_i, sigma_i) over suboptimal arms."""
    gv = gap_vector(instance)
    if len(gv.optimal) > 1:
        warnings.warn(
            f"instance has {len(gv.optimal)} arms tied at the optimum; "
            "tied arms are excluded from the lower-bound sum",
            stacklevel=2,
        )
    kl = _KLINF[instance.model]
    total = 0.0
    for arm, delta in zip(instance.arms, gv.gaps):
        if delta > 0:
            total += delta / kl(delta, arm.sigma)
    return total


def lb_curve(instance: BanditInstance, t_grid) -> LowerBoundCurve:
    """coefficient * log t on an ascending positive grid."""
    grid = [float(t) for t in t_grid]
    if not grid:
        raise ValueError("t_grid must be nonempty")
    if any(t <= 0 for t in grid):
        raise ValueError("t_grid entries must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("t_grid must be strictly ascending")
    coeff = lb_coefficient(instance)
    values = tuple(max(0.0, coeff * math.log(t)) for t in grid)
    return LowerBoundCurve(t_grid=tuple(int(t) if float(t).is_integer() else t for t in grid), values=values)
