"""Independent reference implementations used as test oracles.

Nothing here imports from banditlab's numerics: the CDF, the quantile
bisection, the splitmix64 reference, and the two-pass variance are written
from the defining formulas so that agreement with the package is evidence,
not tautology.
"""
from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64_stream(seed: int, count: int) -> list[int]:
    """Reference splitmix64: state += golden gamma, then finalize."""
    out = []
    state = seed & _MASK64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out


def sigma_marginal_cdf(sigma: float, sigma_hat: float, n_k: float) -> float:
    """Closed-form CDF of the width marginal, straight polynomial form."""
    if sigma <= sigma_hat:
        return 0.0
    r = sigma_hat / sigma
    return 1.0 - (n_k + 1.0) * r**n_k + n_k * r ** (n_k + 1.0)


def sigma_marginal_pdf(sigma: float, sigma_hat: float, n_k: float) -> float:
    if sigma <= sigma_hat:
        return 0.0
    return n_k * (n_k + 1.0) * sigma_hat**n_k * (sigma - sigma_hat) / sigma ** (n_k + 2.0)


def bisect_sigma_quantile(u: float, sigma_hat: float, n_k: float) -> float:
    """Bracketed bisection on the closed-form CDF: double the upper end
    until it covers u, then bisect to relative width 1e-13."""
    lo = sigma_hat
    hi = 2.0 * sigma_hat
    while sigma_marginal_cdf(hi, sigma_hat, n_k) <= u:
        hi *= 2.0
        if hi > 1e300:
            raise AssertionError("bracket exploded")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sigma_marginal_cdf(mid, sigma_hat, n_k) < u:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return 0.5 * (lo + hi)


def ks_distance(sorted_samples: np.ndarray, cdf_values: np.ndarray) -> float:
    """Two-sided Kolmogorov-Smirnov distance given the CDF at the sorted
    sample points."""
    n = sorted_samples.size
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(cdf_values - (i - 1) / n, i / n - cdf_values)))


def two_pass_css(xs) -> float:
    m = math.fsum(xs) / len(xs)
    return math.fsum((x - m) ** 2 for x in xs)
