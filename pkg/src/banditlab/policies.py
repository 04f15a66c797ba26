"""TS and TS-T decision rules.

A policy's per-round randomness is a fixed-width block of uniforms from
the run's stream: two per arm in index order (uniform model: sigma then
mu-given-sigma; gaussian model: normal then chi-square), then one
tie-break uniform, always consumed whether or not a tie occurs.  The
fixed layout is load-bearing: it is what lets the harness pre-draw blocks
for thousands of rounds at once without changing any draw.

The sampling cores below broadcast over arbitrary leading shape, so the
scalar `ts_select` (shape (K,)) and the harness's batched engine (shape
(R, K)) run literally the same arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .core import BanditInstance
from .posteriors import PriorK, _sigma_log_growth, gamma_quantile, prior_k_for
from .rewards import (
    GaussianStats,
    UniformStats,
    sample_reward,
    update_gaussian_stats,
    update_uniform_stats,
)

POLICY_KINDS = ("ts", "tst")

# Generators emit u in [0, 1); the open-interval quantile inputs receive
# max(u, 2^-64) so a zero draw cannot degenerate sigma or chi-square.
_U_FLOOR = 2.0**-64

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class PolicyConfig:
    kind: str
    k: PriorK
    model: str

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"kind must be one of {POLICY_KINDS}, got {self.kind!r}")
        if self.model not in ("uniform", "gaussian"):
            raise ValueError(f"model must be 'uniform' or 'gaussian', got {self.model!r}")

    @property
    def truncated(self) -> bool:
        return self.kind == "tst"

    @property
    def known_suboptimal(self) -> bool:
        """Untruncated TS on the uniform model with k >= 1 has provably
        super-logarithmic regret; flagged so outputs carry the warning."""
        return self.kind == "ts" and self.model == "uniform" and self.k.k >= 1.0

    def spec_string(self) -> str:
        return f"{self.kind}:k={self.k.k:g}"


def parse_policy_spec(spec: str, model: str) -> PolicyConfig:
    """Parse "ts:k=<real>" / "tst:k=<real>" or named-prior forms such as
    "ts:reference", "tst:jeffreys", "ts:uniform-ls"."""
    kind, sep, rest = spec.strip().partition(":")
    kind = kind.lower()
    if not sep or kind not in POLICY_KINDS or not rest:
        raise ValueError(f"bad policy spec {spec!r}: expected 'ts:...' or 'tst:...'")
    if rest.startswith("k="):
        try:
            k = PriorK(float(rest[2:]))
        except ValueError as exc:
            raise ValueError(f"bad policy spec {spec!r}: {exc}") from None
    else:
        k = prior_k_for(rest)
    return PolicyConfig(kind=kind, k=k, model=model)


@dataclass(frozen=True)
class DiracArm:
    fixed_mu: float


def make_dirac_arm(mu2: float) -> DiracArm:
    """Oracle arm whose sampled index is pinned at its true mean.  The
    override is policy-level: rewards are still drawn from the true law
    and still update the arm's statistics."""
    return DiracArm(fixed_mu=mu2)


@dataclass
class PolicyState:
    stats: list
    counts: list
    t: int = 1
    overrides: dict[int, DiracArm] = field(default_factory=dict)
    scale_floor_events: int = 0

    @property
    def n_arms(self) -> int:
        return len(self.stats)


def new_policy_state(model: str, n_arms: int) -> PolicyState:
    empty = UniformStats.empty if model == "uniform" else GaussianStats.empty
    return PolicyState(stats=[empty() for _ in range(n_arms)], counts=[0] * n_arms)


def initial_play_count(model: str, k: PriorK | float) -> int:
    """Forced plays per arm before posterior sampling is proper.

    Uniform model: max(2, 3 - ceil(k)).  Gaussian model: the smallest n
    with n >= 2 and df = n + k - 2 >= 1, i.e. max(2, ceil(3 - k))."""
    kk = k.k if isinstance(k, PriorK) else float(k)
    if model == "uniform":
        return max(2, 3 - math.ceil(kk))
    if model == "gaussian":
        return max(2, math.ceil(3.0 - kk))
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# Sampling cores, shared by ts_select and the batched harness engine.
# ---------------------------------------------------------------------------

def effective_scale_uniform(mu_hat, sigma_hat, n, truncated: bool):
    """Scale fed to the sigma marginal: sigma_hat (TS) or max(sigma_hat, 1/n)
    (TS-T).  Under TS an exact-tie sigma_hat = 0 (measure zero) is floored at
    eps*max(1, |mu_hat|); returns (scale, floor_event_count)."""
    if truncated:
        return np.maximum(sigma_hat, 1.0 / np.asarray(n, dtype=float)), 0
    zero = np.asarray(sigma_hat) == 0.0
    events = int(np.count_nonzero(zero))
    if events:
        floor = _EPS * np.maximum(1.0, np.abs(mu_hat))
        return np.where(zero, floor, sigma_hat), events
    return sigma_hat, 0


def effective_scale_gaussian(loc, css, n, truncated: bool):
    """Scale of the t posterior: sqrt(css/n) (TS) or sqrt(max(1, css)/n)
    (TS-T), with the same measure-zero floor as the uniform case."""
    n = np.asarray(n, dtype=float)
    if truncated:
        return np.sqrt(np.maximum(1.0, css) / n), 0
    zero = np.asarray(css) == 0.0
    events = int(np.count_nonzero(zero))
    scale = np.sqrt(np.asarray(css, dtype=float) / n)
    if events:
        floor = _EPS * np.maximum(1.0, np.abs(loc))
        return np.where(zero, floor, scale), events
    return scale, 0


def sample_mu_uniform(u_sig, u_mu, mu_hat, scale, n_k):
    """Sequential posterior index draws, any broadcastable shape.

    width = scale * expm1(log-growth) forms sigma_tilde - scale without the
    cancellation of exp-then-subtract; the mu draw is the open-interval
    uniform of that width centered at mu_hat."""
    u = np.maximum(u_sig, _U_FLOOR)
    growth = _sigma_log_growth(u, n_k)
    width = scale * np.expm1(growth)
    return mu_hat + (u_mu - 0.5) * width


def sample_mu_gaussian(u_z, u_chi, loc, scale, df):
    """Marginal location-posterior draws, any broadcastable shape.

    The posterior density is proportional to
    (1 + ((mu - loc)/scale)^2)^(-(df+1)/2) with scale = sqrt(css/n) (or the
    truncated variant), realized as loc + scale * Z / sqrt(chi2_df).  Note
    the chi-square is NOT divided by df here: this family is the standard
    Student t only after rescaling by sqrt(df).  Feeding scale to a
    standard t instead would leave the posterior width at sqrt(css/n) ~
    sigma forever and selection would never concentrate."""
    z = special.ndtri(u_z)
    chi2 = 2.0 * gamma_quantile(np.asarray(df, dtype=float) / 2.0, np.maximum(u_chi, _U_FLOOR))
    with np.errstate(divide="ignore", invalid="ignore"):
        y = z / np.sqrt(chi2)
    return loc + scale * y


def argmax_with_ties(mu_samples: np.ndarray, u_tie: np.ndarray) -> np.ndarray:
    """Row-wise argmax of (R, K) samples; among tied maximizers row r picks
    entry floor(u_tie[r] * m) in index order (m = number of maximizers)."""
    best = np.argmax(mu_samples, axis=1)
    rows = np.arange(mu_samples.shape[0])
    mx = mu_samples[rows, best]
    ties = mu_samples == mx[:, None]
    ntie = ties.sum(axis=1)
    multi = np.nonzero(ntie > 1)[0]
    if multi.size:
        m = ntie[multi]
        pick = np.minimum((u_tie[multi] * m).astype(np.int64), m - 1)
        cs = np.cumsum(ties[multi], axis=1)
        best[multi] = np.argmax(cs == (pick + 1)[:, None], axis=1)
    return best


def _index_samples_from_state(state: PolicyState, cfg: PolicyConfig, block: np.ndarray) -> np.ndarray:
    """Per-arm posterior index draws for one round, from a (2K,) block."""
    K = state.n_arms
    u_first = block[0 : 2 * K : 2]
    u_second = block[1 : 2 * K : 2]
    n = np.array([s.n for s in state.stats], dtype=float)
    nk = n + cfg.k.k - 2.0
    if cfg.model == "uniform":
        mu_hat = np.array([s.mle_mu for s in state.stats])
        sigma_hat = np.array([s.mle_sigma for s in state.stats])
        scale, events = effective_scale_uniform(mu_hat, sigma_hat, n, cfg.truncated)
        mu_t = sample_mu_uniform(u_first, u_second, mu_hat, scale, nk)
    else:
        loc = np.array([s.mean for s in state.stats])
        css = np.array([s.css for s in state.stats])
        scale, events = effective_scale_gaussian(loc, css, n, cfg.truncated)
        mu_t = sample_mu_gaussian(u_first, u_second, loc, scale, nk)
    state.scale_floor_events += events
    for i, arm in state.overrides.items():
        mu_t[i] = arm.fixed_mu
    return mu_t


def ts_select(state: PolicyState, cfg: PolicyConfig, rng: np.random.Generator) -> int:
    """One selection round: sample each arm's posterior index, return the
    argmax with uniform tie-breaking.  Consumes exactly 2K+1 uniforms."""
    K = state.n_arms
    n0 = initial_play_count(cfg.model, cfg.k)
    short = [i for i, c in enumerate(state.counts) if c < n0 and i not in state.overrides]
    if short:
        raise ValueError(
            f"arms {short} have fewer than n0={n0} observations; run the initial phase first"
        )
    buf = rng.random(2 * K + 1)
    mu_t = _index_samples_from_state(state, cfg, buf[: 2 * K])
    chosen = argmax_with_ties(mu_t[None, :], buf[2 * K : 2 * K + 1])
    return int(chosen[0])


def observe(state: PolicyState, cfg: PolicyConfig, arm_index: int, x: float) -> None:
    """Fold one reward into the state and advance the round counter."""
    if cfg.model == "uniform":
        state.stats[arm_index] = update_uniform_stats(state.stats[arm_index], x)
    else:
        state.stats[arm_index] = update_gaussian_stats(state.stats[arm_index], x)
    state.counts[arm_index] += 1
    state.t += 1


def run_initial_phase(
    state: PolicyState,
    cfg: PolicyConfig,
    instance: BanditInstance,
    rng: np.random.Generator,
) -> PolicyState:
    """Play every arm n0 times, round-robin by index (0, 1, ..., K-1,
    0, 1, ...), consuming one reward uniform per play."""
    if state.t != 1 or any(c != 0 for c in state.counts):
        raise ValueError("initial phase requires a fresh state")
    n0 = initial_play_count(cfg.model, cfg.k)
    K = instance.n_arms
    for _ in range(n0):
        for i in range(K):
            x = sample_reward(instance, i, rng)
            observe(state, cfg, i, x)
    return state
