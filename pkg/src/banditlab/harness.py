"""Seeded Monte-Carlo regret experiments.

Execution model
---------------
Each run r owns a PCG64 stream seeded by derive_run_seed(master, r) and a
rigid uniform-consumption layout:

  * initial phase: one uniform per forced play, K*n0 total, plays ordered
    round-robin by arm index;
  * each selection round: a block of 2K+2 uniforms -- two per arm in index
    order (sigma/mu for the uniform model, normal/chi-square for the
    gaussian), one tie-break uniform (consumed even without a tie), one
    reward uniform.

Because the layout never depends on what the policy decides, whole blocks
of rounds can be pre-drawn per run and whole batches of runs advanced in
lockstep through vectorized arithmetic.  Every transform downstream of the
uniforms is an elementwise quantile function, so a run's trajectory is a
pure function of (master_seed, run_index): batch composition, chunk size,
and worker count cannot touch it.  Batches are tiled in fixed 1024-run
slabs and per-point aggregation folds runs in index order with fsum, which
is where the worker-count invariance of results comes from.

Regret accounting is pseudo-regret: cumulative sums of true gaps of the
pulled arms, evaluated at recorded rounds directly from the play counts
(sum_i gap_i * N_i(t+1)), the count decomposition of sum_t gap_{j(t)}.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .core import Arm, BanditInstance, SeedSpec, derive_run_seed, gap_vector
from .policies import (
    PolicyConfig,
    argmax_with_ties,
    effective_scale_gaussian,
    effective_scale_uniform,
    initial_play_count,
    sample_mu_gaussian,
    sample_mu_uniform,
)

_RUN_TILE = 1024   # runs advanced together in one vectorized slab
_ROUND_CHUNK = 256  # rounds whose uniform blocks are pre-drawn per slab

DIAG_THEOREM2 = "theorem2"


def theorem2_instance() -> BanditInstance:
    """Two-arm geometry for the polynomial-regret diagnostic: arm 0 is
    Uniform(0, 1), arm 1 is Uniform(0, 0.1) and gets the Dirac override."""
    return BanditInstance(model="uniform", arms=(Arm(0.5, 1.0), Arm(0.05, 0.1)))


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    policy: PolicyConfig
    horizon: int
    runs: int
    master_seed: int
    record_stride: int = 10
    diagnostic: str | None = None

    def __post_init__(self) -> None:
        if self.policy.model != self.instance.model:
            raise ValueError(
                f"policy model {self.policy.model!r} does not match instance model "
                f"{self.instance.model!r}"
            )
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must fit in uint64")
        k_n0 = self.instance.n_arms * initial_play_count(self.policy.model, self.policy.k)
        if self.horizon < k_n0:
            raise ValueError(
                f"horizon {self.horizon} is below the K*n0 = {k_n0} forced initial plays"
            )
        if self.diagnostic is not None:
            if self.diagnostic != DIAG_THEOREM2:
                raise ValueError(f"unknown diagnostic {self.diagnostic!r}")
            if self.instance.n_arms < 2:
                raise ValueError("the Dirac diagnostic needs at least two arms")

    @property
    def dirac_arm(self) -> int | None:
        """Arm index whose sampled posterior value is pinned at its true mean."""
        return 1 if self.diagnostic == DIAG_THEOREM2 else None

    def to_json_dict(self) -> dict:
        return {
            "instance": self.instance.to_json_dict(),
            "policy": {
                "kind": self.policy.kind,
                "k": self.policy.k.k,
                "model": self.policy.model,
                "known_suboptimal": self.policy.known_suboptimal,
            },
            "horizon": self.horizon,
            "runs": self.runs,
            "master_seed": self.master_seed,
            "record_stride": self.record_stride,
            "diagnostic": self.diagnostic,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ExperimentConfig":
        from .posteriors import PriorK

        pol = obj["policy"]
        return cls(
            instance=BanditInstance.from_json_dict(obj["instance"]),
            policy=PolicyConfig(kind=pol["kind"], k=PriorK(float(pol["k"])), model=pol["model"]),
            horizon=int(obj["horizon"]),
            runs=int(obj["runs"]),
            master_seed=int(obj["master_seed"]),
            record_stride=int(obj.get("record_stride", 10)),
            diagnostic=obj.get("diagnostic"),
        )


def record_points(config: ExperimentConfig) -> np.ndarray:
    """Recorded rounds: the stride grid plus log-spaced extras (~40 per
    decade) for dense early coverage on log-x plots, always including 1
    and the horizon."""
    T = config.horizon
    pts = set(range(config.record_stride, T + 1, config.record_stride))
    if T >= 1:
        n_log = int(math.ceil(40.0 * math.log10(T))) + 2 if T > 1 else 1
        logs = np.unique(np.round(np.logspace(0.0, math.log10(T), n_log)).astype(np.int64))
        pts.update(int(x) for x in logs if 1 <= x <= T)
    pts.add(1)
    pts.add(T)
    return np.array(sorted(pts), dtype=np.int64)


@dataclass
class RegretTrace:
    t_points: np.ndarray
    mean_regret: np.ndarray
    stderr: np.ndarray
    run_count: int
    config: ExperimentConfig | None = None
    diagnostics: dict = field(default_factory=dict)


@dataclass
class BatchResult:
    """Raw per-run output of one vectorized slab."""

    regret: np.ndarray            # (B, P) cumulative pseudo-regret at record points
    final_counts: np.ndarray      # (B, K) play counts N_i(T+1)
    scale_floor_events: int       # measure-zero sigma_hat = 0 substitutions (TS)
    truncation_binding: int       # arm-rounds where TS-T truncation changed the scale
    actions: np.ndarray | None    # (B, T) pulled arm per round, if collected


def _initial_order(n_arms: int, n0: int) -> np.ndarray:
    return np.tile(np.arange(n_arms, dtype=np.int64), n0)


def _simulate_slab(
    config: ExperimentConfig, run_indices: range, collect_actions: bool
) -> BatchResult:
    inst = config.instance
    pol = config.policy
    K = inst.n_arms
    T = config.horizon
    B = len(run_indices)
    n0 = initial_play_count(pol.model, pol.k)
    km2 = pol.k.k - 2.0
    truncated = pol.truncated
    uniform_model = pol.model == "uniform"
    dirac = config.dirac_arm
    dirac_mu = inst.arms[dirac].mu if dirac is not None else None

    points = record_points(config)
    P = points.size
    gaps = np.array(gap_vector(inst).gaps)
    arm_mu = np.array([a.mu for a in inst.arms])
    arm_sigma = np.array([a.sigma for a in inst.arms])
    arm_lo = arm_mu - arm_sigma / 2.0

    rngs = [
        np.random.default_rng(derive_run_seed(SeedSpec(config.master_seed, int(r))))
        for r in run_indices
    ]
    rows = np.arange(B)

    counts = np.zeros((B, K), dtype=np.int64)
    if uniform_model:
        xmin = np.full((B, K), np.inf)
        xmax = np.full((B, K), -np.inf)
    else:
        mean = np.zeros((B, K))
        css = np.zeros((B, K))

    regret = np.empty((B, P))
    actions = np.empty((B, T), dtype=np.int64) if collect_actions else None
    floor_events = 0
    trunc_binding = 0

    def record(p: int) -> None:
        acc = np.zeros(B)
        for i in range(K):
            acc = acc + gaps[i] * counts[:, i]
        regret[:, p] = acc

    # ---- forced initial plays, one uniform each, round-robin by index ----
    order = _initial_order(K, n0)
    t_init = order.size
    blocks0 = np.empty((B, t_init))
    for b in range(B):
        blocks0[b] = rngs[b].random(t_init)
    p = 0
    for s in range(t_init):
        i = int(order[s])
        u = blocks0[:, s]
        if uniform_model:
            x = arm_lo[i] + u * arm_sigma[i]
            xmin[:, i] = np.minimum(xmin[:, i], x)
            xmax[:, i] = np.maximum(xmax[:, i], x)
        else:
            x = arm_mu[i] + arm_sigma[i] * special.ndtri(u)
            nb = counts[:, i].astype(float)
            d = x - mean[:, i]
            new_mean = mean[:, i] + d / (nb + 1.0)
            css[:, i] += d * (x - new_mean)
            mean[:, i] = new_mean
        counts[:, i] += 1
        if collect_actions:
            actions[:, s] = i
        t_now = s + 1
        while p < P and points[p] == t_now:
            record(p)
            p += 1

    # ---- selection rounds, pre-drawn in fixed-width chunks ----
    width = 2 * K + 2
    for start in range(t_init, T, _ROUND_CHUNK):
        c = min(_ROUND_CHUNK, T - start)
        blocks = np.empty((B, c, width))
        for b in range(B):
            blocks[b] = rngs[b].random((c, width))
        for j in range(c):
            us = blocks[:, j, :]
            u_first = us[:, 0 : 2 * K : 2]
            u_second = us[:, 1 : 2 * K : 2]
            u_tie = us[:, 2 * K]
            u_rew = us[:, 2 * K + 1]
            nk = counts + km2
            if uniform_model:
                mu_hat = 0.5 * (xmin + xmax)
                sigma_hat = xmax - xmin
                if truncated:
                    # exact complement of max(sigma_hat, 1/n) == sigma_hat
                    trunc_binding += int(np.count_nonzero(sigma_hat < 1.0 / counts))
                scale, ev = effective_scale_uniform(mu_hat, sigma_hat, counts, truncated)
                mu_t = sample_mu_uniform(u_first, u_second, mu_hat, scale, nk)
            else:
                if truncated:
                    # exact complement of max(1, css) == css
                    trunc_binding += int(np.count_nonzero(css < 1.0))
                scale, ev = effective_scale_gaussian(mean, css, counts, truncated)
                mu_t = sample_mu_gaussian(u_first, u_second, mean, scale, nk)
            floor_events += ev
            if dirac is not None:
                mu_t[:, dirac] = dirac_mu
            best = argmax_with_ties(mu_t, u_tie)

            if uniform_model:
                x = arm_lo[best] + u_rew * arm_sigma[best]
                xmin[rows, best] = np.minimum(xmin[rows, best], x)
                xmax[rows, best] = np.maximum(xmax[rows, best], x)
            else:
                x = arm_mu[best] + arm_sigma[best] * special.ndtri(u_rew)
                nb = counts[rows, best].astype(float)
                d = x - mean[rows, best]
                new_mean = mean[rows, best] + d / (nb + 1.0)
                css[rows, best] += d * (x - new_mean)
                mean[rows, best] = new_mean
            counts[rows, best] += 1
            t_now = start + j + 1
            if collect_actions:
                actions[:, t_now - 1] = best
            while p < P and points[p] == t_now:
                record(p)
                p += 1

    return BatchResult(
        regret=regret,
        final_counts=counts,
        scale_floor_events=floor_events,
        truncation_binding=trunc_binding,
        actions=actions,
    )


def run_single(config: ExperimentConfig, run_index: int) -> np.ndarray:
    """Cumulative pseudo-regret of one run at the recorded rounds; a pure
    function of (config, master_seed, run_index)."""
    if not 0 <= run_index:
        raise ValueError(f"run_index must be >= 0, got {run_index}")
    return _simulate_slab(config, range(run_index, run_index + 1), False).regret[0]


def run_details(
    config: ExperimentConfig, run_lo: int, run_hi: int, collect_actions: bool = False
) -> BatchResult:
    """Raw slab output (per-run regret rows, final counts, diagnostic
    counters, optionally the full action sequences) for runs
    [run_lo, run_hi).  The rows are bit-equal to the corresponding
    run_single / run_experiment values."""
    if not 0 <= run_lo < run_hi:
        raise ValueError(f"need 0 <= run_lo < run_hi, got [{run_lo}, {run_hi})")
    return _simulate_slab(config, range(run_lo, run_hi), collect_actions)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> RegretTrace:
    """Mean and standard error of pseudo-regret across config.runs runs.

    `workers` sizes a thread pool over the fixed 1024-run slabs; results
    are stitched and reduced in run-index order, so the trace is
    bit-identical for any worker count.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    R = config.runs
    points = record_points(config)
    P = points.size
    slabs = [range(s, min(s + _RUN_TILE, R)) for s in range(0, R, _RUN_TILE)]

    all_regret = np.empty((R, P))
    floor_events = 0
    trunc_binding = 0
    if len(slabs) == 1 or workers == 1:
        results = [_simulate_slab(config, sl, False) for sl in slabs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda sl: _simulate_slab(config, sl, False), slabs))
    for sl, res in zip(slabs, results):
        all_regret[sl.start : sl.stop] = res.regret
        floor_events += res.scale_floor_events
        trunc_binding += res.truncation_binding

    mean = np.empty(P)
    serr = np.empty(P)
    for q in range(P):
        col = all_regret[:, q].tolist()
        m = math.fsum(col) / R
        mean[q] = m
        if R > 1:
            var = math.fsum([(v - m) ** 2 for v in col]) / (R - 1)
            serr[q] = math.sqrt(var / R)
        else:
            serr[q] = 0.0

    return RegretTrace(
        t_points=points,
        mean_regret=mean,
        stderr=serr,
        run_count=R,
        config=config,
        diagnostics={
            "scale_floor_events": floor_events,
            "truncation_binding_events": trunc_binding,
        },
    )


def fit_growth_exponent(trace: RegretTrace, t_lo: float, t_hi: float) -> float:
    """Least-squares slope of log(mean_regret) vs log(t) over the recorded
    points inside [t_lo, t_hi]."""
    if not t_lo < t_hi:
        raise ValueError(f"need t_lo < t_hi, got [{t_lo}, {t_hi}]")
    t = np.asarray(trace.t_points, dtype=float)
    r = np.asarray(trace.mean_regret, dtype=float)
    mask = (t >= t_lo) & (t <= t_hi)
    if int(mask.sum()) < 2:
        raise ValueError(f"fewer than two recorded points inside [{t_lo}, {t_hi}]")
    tw = t[mask]
    rw = r[mask]
    if np.any(rw <= 0.0):
        raise ValueError("mean regret must be strictly positive on the fit window")
    x = np.log(tw)
    y = np.log(rw)
    xm = x - x.mean()
    return float(np.sum(xm * y) / np.sum(xm * xm))


def write_trace(trace: RegretTrace, path: str, format: str = "csv") -> None:
    """Persist a trace as CSV (t,mean_regret,stderr) or JSON with the full
    config echoed for provenance.  Floats are written at full precision via
    repr, so a read-back reproduces the arrays exactly."""
    fmt = format.lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    try:
        if fmt == "csv":
            lines = ["t,mean_regret,stderr"]
            for t, m, s in zip(trace.t_points, trace.mean_regret, trace.stderr):
                lines.append(f"{int(t)},{float(m)!r},{float(s)!r}")
            text = "\n".join(lines) + "\n"
        else:
            if trace.config is None:
                raise ValueError("JSON trace output requires trace.config for the echo")
            obj = {
                "config": trace.config.to_json_dict(),
                "t": [int(t) for t in trace.t_points],
                "mean": [float(m) for m in trace.mean_regret],
                "stderr": [float(s) for s in trace.stderr],
            }
            text = json.dumps(obj, indent=2) + "\n"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"writing trace to {path!r}: {exc}") from exc


def read_trace(path: str) -> RegretTrace:
    """Read back a trace written by write_trace; format inferred from
    content.  CSV carries no config, so run_count is 0 there."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"reading trace from {path!r}: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = json.loads(text)
        config = ExperimentConfig.from_json_dict(obj["config"])
        return RegretTrace(
            t_points=np.array(obj["t"], dtype=np.int64),
            mean_regret=np.array(obj["mean"], dtype=float),
            stderr=np.array(obj["stderr"], dtype=float),
            run_count=config.runs,
            config=config,
        )
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "t,mean_regret,stderr":
        raise ValueError(f"{path!r} is not a trace file (bad header)")
    t, m, s = [], [], []
    for ln in lines[1:]:
        a, b, c = ln.split(",")
        t.append(int(a))
        m.append(float(b))
        s.append(float(c))
    return RegretTrace(
        t_points=np.array(t, dtype=np.int64),
        mean_regret=np.array(m, dtype=float),
        stderr=np.array(s, dtype=float),
        run_count=0,
        config=None,
    )
