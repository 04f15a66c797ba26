"""Exact posterior sampling for the priors pi(mu, sigma) ∝ sigma^(-k).

Uniform model, n observations with extremes (x_min, x_max), center
mu_hat = (x_min + x_max)/2, width sigma_hat = x_max - x_min, and
n_k = n + k - 2:

    sigma marginal density   n_k (n_k+1) sigma_hat^{n_k} (sigma - sigma_hat) / sigma^{n_k+2}
    sigma marginal CDF       F(sigma) = 1 - (n_k+1) r^{n_k} + n_k r^{n_k+1},  r = sigma_hat / sigma
    mu given sigma           Uniform, center mu_hat, width sigma - sigma_hat

Gaussian model: mu follows a non-standardized Student t with df = n_k,
location mean and scale sqrt(css / n).

Every sampler here is an inverse transform of explicit uniforms, so equal
inputs give bit-equal outputs; that determinism is what the harness's
worker-count invariance rests on.  The two quantile solvers are hand-rolled
because library inverses (stdtrit, gammaincinv) cost about a microsecond
per element, an order of magnitude over the experiment time budgets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .rewards import GaussianStats, UniformStats


@dataclass(frozen=True)
class PriorK:
    k: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.k):
            raise ValueError(f"prior exponent k must be finite, got {self.k}")


_NAMED_PRIOR_K = {
    "uniform-ls": 0.0,
    "uniformls": 0.0,
    "reference": 1.0,
    "jeffreys": 2.0,
    "uniform-location-rate": 2.0,
    "uniformlocationrate": 2.0,
}


def prior_k_for(name: str) -> PriorK:
    """Map a named noninformative prior to its exponent k.

    The uniform prior over (location, scale) gives k=0; the reference
    prior is sigma^(-1); Jeffreys is sigma^(-2); and the uniform prior
    under the (location, rate) parameterization picks up a sigma^(-2)
    Jacobian, landing on k=2 as well.
    """
    key = name.strip().lower().replace("_", "-").replace(" ", "-")
    try:
        return PriorK(_NAMED_PRIOR_K[key])
    except KeyError:
        raise ValueError(
            f"unknown prior name {name!r}; expected one of "
            "uniform-ls, reference, jeffreys, uniform-location-rate"
        ) from None


@dataclass(frozen=True)
class UniformPosteriorParams:
    mu_hat: float
    sigma_hat: float
    n_k: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu_hat) and math.isfinite(self.sigma_hat) and math.isfinite(self.n_k)):
            raise ValueError("posterior parameters must be finite")
        if self.sigma_hat < 0:
            raise ValueError(f"sigma_hat must be >= 0, got {self.sigma_hat}")
        if self.n_k <= 0:
            raise ValueError(f"n_k must be > 0 for a proper posterior, got {self.n_k}")


@dataclass(frozen=True)
class GaussianPosteriorParams:
    loc: float
    scale: float
    df: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.loc) and math.isfinite(self.scale) and math.isfinite(self.df)):
            raise ValueError("posterior parameters must be finite")
        if self.scale <= 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if self.df <= 0:
            raise ValueError(f"df must be > 0 (improper posterior), got {self.df}")


def uniform_sigma_cdf(sigma, params: UniformPosteriorParams):
    """Closed-form sigma-marginal CDF; accepts scalar or array sigma.

    Evaluated as -expm1(n_k log r + log1p(n_k (1-r))) with 1-r formed as
    (sigma - sigma_hat)/sigma, which stays accurate where the direct
    polynomial cancels (sigma near sigma_hat, F near 0).
    """
    nk = params.n_k
    sh = params.sigma_hat
    s = np.asarray(sigma, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.log(sh) - np.log(s)
        m = (s - sh) / s
        val = -np.expm1(nk * lr + np.log1p(nk * m))
    out = np.where(s <= sh, 0.0, val)
    return float(out) if np.ndim(sigma) == 0 else out


def _sigma_log_growth(u, n_k, iters: int = 6):
    """Solve the sigma-marginal quantile; returns log(sigma_tilde / sigma_hat).

    With r = sigma_hat/sigma and v = 1 - u, the quantile equation is
    G(r) = r^{n_k} (1 + n_k (1 - r)) = v.  In y = log r the residual

        H(y) = n_k y + log1p(n_k (1 - e^y)) - log v

    is strictly increasing and strictly concave (H'' = -n_k(n_k+1) e^y / w^2
    with w = 1 + n_k(1 - e^y)), so after its first step Newton sits on the
    f <= 0 side and climbs monotonically into the root: no bracketing or
    damping is needed.  The start point lives inside the analytic bracket
    [ (log v - log1p(n_k))/n_k, log v / n_k ] obtained from 1 <= 1+n_k(1-r)
    <= 1+n_k.

    Lanes where the u -> 0 asymptote sigma/sigma_hat - 1 ~ sqrt(2u/(n_k(n_k+1)))
    is below 1e-8 are frozen at the asymptote: there H cannot resolve sign in
    float64, and the asymptote's own relative error (~s0) contributes less
    than 1e-16 to sigma_tilde.

    Both u and n_k may be arrays (they broadcast).  Returned error is
    ~6.7e-14 relative on sigma_tilde at iters=6 (worst over stress grids).
    """
    u = np.asarray(u, dtype=float)
    nk = np.asarray(n_k, dtype=float)
    logv = np.log1p(-u)
    nkp1 = nk * (nk + 1.0)
    with np.errstate(invalid="ignore"):
        s0 = np.sqrt(2.0 * u / nkp1)
    frozen = (u <= 0.0) | (s0 < 1e-8)
    y_lo = (logv - np.log1p(nk)) / nk
    y_hi = logv / nk
    y = np.where(
        u > 0.125,
        0.5 * (y_lo + y_hi),
        np.clip(np.log1p(-np.minimum(s0, 0.999999)), y_lo, y_hi),
    )
    y = np.where(frozen, -1e-3, y)
    for _ in range(iters):
        m = -np.expm1(y)
        w1 = nk * m
        H = nk * y + np.log1p(w1) - logv
        dH = nkp1 * m / (1.0 + w1)
        y = y - np.where(frozen, 0.0, H / dH)
    return np.where(frozen, s0, -y)


def uniform_sample_sigma(u, params: UniformPosteriorParams):
    """Inverse-transform draw from the sigma marginal; scalar or array u."""
    if params.sigma_hat == 0:
        raise ValueError(
            "sigma_hat = 0 gives a degenerate sigma marginal; substitute the "
            "truncated scale (uniform_truncated_scale) or a positive floor first"
        )
    uu = np.asarray(u, dtype=float)
    if np.any(uu <= 0.0) or np.any(uu >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    out = params.sigma_hat * np.exp(_sigma_log_growth(uu, params.n_k))
    return float(out) if np.ndim(u) == 0 else out


def uniform_sample_mu(u, mu_hat: float, sigma_hat: float, sigma_tilde):
    """Conditional mu draw given sigma_tilde: uniform, center mu_hat,
    width sigma_tilde - sigma_hat.  Width 0 returns mu_hat."""
    st = np.asarray(sigma_tilde, dtype=float)
    if np.any(st < sigma_hat):
        raise ValueError("sigma_tilde must be >= sigma_hat")
    uu = np.asarray(u, dtype=float)
    out = mu_hat + (uu - 0.5) * (st - sigma_hat)
    return float(out) if (np.ndim(u) == 0 and np.ndim(sigma_tilde) == 0) else out


def uniform_truncated_scale(stats: UniformStats) -> float:
    """Truncated width for TS-T: never below 1/n, so the posterior stays
    proper and over-concentration on an early narrow range is impossible."""
    if stats.n < 1:
        raise ValueError("need at least one observation")
    return max(stats.mle_sigma, 1.0 / stats.n)


def gaussian_truncated_scale(stats: GaussianStats) -> float:
    """Truncated scale for TS-T: sqrt(max(1, css)/n) >= n^(-1/2)."""
    if stats.n < 1:
        raise ValueError("need at least one observation")
    return math.sqrt(max(1.0, stats.css) / stats.n)


# ---------------------------------------------------------------------------
# Gamma quantile (regularized incomplete gamma inverse) and Student t draws.
# ---------------------------------------------------------------------------

def _halley_log_gamma(a, x0, logt, use_q: bool, iters: int):
    """Halley iteration for log C(a, e^w) = logt in w = log x, where C is
    the regularized lower (P) or upper (Q) incomplete gamma function.

    Working on log-CDF in log-x linearizes both tails: in the far left tail
    log P ~ a w, so Newton converges from starts that are orders of magnitude
    off, where x-space iteration diverges (pdf underflows to 0 there).
    The derivative is formed in log space,

        dG/dw = ± exp((a-1) w - x - lgamma(a) + w - log C),

    and the Halley correction uses G''/(2G') = (a - x - G')/2 exactly.
    """
    w = np.log(x0)
    lga = special.gammaln(a)
    sgn = -1.0 if use_q else 1.0
    for _ in range(iters):
        x = np.exp(w)
        C = special.gammaincc(a, x) if use_q else special.gammainc(a, x)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            logC = np.log(C)
            G = logC - logt
            Gp = sgn * np.exp((a - 1.0) * w - x - lga + w - logC)
            ratio = G / Gp
            half_gpp_over_gp = 0.5 * (a - x - Gp)
            step = ratio / (1.0 - ratio * half_gpp_over_gp)
            step = np.where(np.isfinite(step), step, 0.0)
        w = w - np.clip(step, -3.0, 3.0)
    return np.exp(w)


def gamma_quantile(a, u, iters: int = 3):
    """Quantile of Gamma(shape=a, scale=1); vectorized over broadcasting
    (a, u).  u <= 0 maps to 0 and u >= 1 to inf; interior lanes split at
    u = 0.5 so each side solves against the numerically dominant tail
    (right-tail accuracy requires the Q branch: P - u cancels as u -> 1).
    Relative error ~2e-14 at iters=3 over stress grids, a >= 5e-4.
    """
    a_arr, u_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(u, dtype=float))
    shape = a_arr.shape
    aa = a_arr.ravel()
    uu = u_arr.ravel()
    out = np.empty(aa.shape)
    lo = uu <= 0.0
    hi = uu >= 1.0
    out[lo] = 0.0
    out[hi] = np.inf
    mid = np.nonzero(~(lo | hi))[0]
    if mid.size:
        am = aa[mid]
        um = uu[mid]
        # Wilson-Hilferty start, swapped for the small-a series start
        # x0 = (u Gamma(a+1))^(1/a) where the cube would go nonpositive.
        z = special.ndtri(um)
        cfac = 1.0 - 1.0 / (9.0 * am) + z / (3.0 * np.sqrt(am))
        with np.errstate(invalid="ignore"):
            x0 = am * cfac**3
        bad = (cfac < 0.2) | ~(x0 > 0)
        if np.any(bad):
            lx = (np.log(um[bad]) + special.gammaln(am[bad] + 1.0)) / am[bad]
            x0[bad] = np.minimum(np.exp(lx), am[bad])
        x0 = np.maximum(x0, 1e-300)
        res = np.empty(mid.size)
        lower = np.nonzero(um <= 0.5)[0]
        upper = np.nonzero(um > 0.5)[0]
        if lower.size:
            res[lower] = _halley_log_gamma(
                am[lower], x0[lower], np.log(um[lower]), use_q=False, iters=iters
            )
        if upper.size:
            res[upper] = _halley_log_gamma(
                am[upper], x0[upper], np.log1p(-um[upper]), use_q=True, iters=iters
            )
        out[mid] = res
    return float(out[0]) if shape == () else out.reshape(shape)


def t_from_uniforms(u_z, u_chi, df):
    """Student t draw from two uniforms: T = Z / sqrt(chi2/df) with
    Z = ndtri(u_z) and chi2 = 2 * gamma_quantile(df/2, u_chi).

    Exact for every real df > 0 (integer or not).  Boundary uniforms give
    honest limits (u_chi = 0 -> chi2 = 0 -> infinite T), flagged nowhere:
    they are measure-zero under the harness's clamped streams.
    """
    z = special.ndtri(np.asarray(u_z, dtype=float))
    chi2 = 2.0 * gamma_quantile(np.asarray(df, dtype=float) / 2.0, u_chi)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = z / np.sqrt(chi2 / df)
    return t


def gaussian_sample_mu(rng: np.random.Generator, params: GaussianPosteriorParams) -> float:
    """Posterior mu draw for the gaussian model; consumes exactly two
    uniforms from `rng` (normal then chi-square quantile input)."""
    u = rng.random(2)
    t = t_from_uniforms(u[0], u[1], params.df)
    return float(params.loc + params.scale * t)
