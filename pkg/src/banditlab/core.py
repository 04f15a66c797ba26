"""Instances, gaps, and seed derivation.

An instance is a finite list of arms, each a location-scale pair
(mu, sigma).  For the uniform model an arm is Uniform(a, b) with
a = mu - sigma/2, b = mu + sigma/2 (so sigma is the support width);
for the gaussian model it is Normal(mu, sigma^2).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

MODELS = ("uniform", "gaussian")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class Arm:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError(f"arm parameters must be finite, got {self}")
        if self.sigma <= 0:
            raise ValueError(f"arm sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class BanditInstance:
    model: str
    arms: tuple[Arm, ...]

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if len(self.arms) < 1:
            raise ValueError("instance needs at least one arm")
        object.__setattr__(self, "arms", tuple(self.arms))

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "arms": [{"mu": a.mu, "sigma": a.sigma} for a in self.arms],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "BanditInstance":
        try:
            arms = tuple(Arm(float(a["mu"]), float(a["sigma"])) for a in obj["arms"])
            return cls(model=obj["model"], arms=arms)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed instance object: {exc}") from exc


def instance_to_json(instance: BanditInstance) -> str:
    """Canonical JSON text for an instance (stable byte-for-byte)."""
    return json.dumps(instance.to_json_dict(), sort_keys=True, indent=2) + "\n"


def instance_from_json(text: str) -> BanditInstance:
    return BanditInstance.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class GapVector:
    """Per-arm suboptimality gaps and the index set of optimal arms."""

    gaps: tuple[float, ...]
    best_mean: float
    optimal: tuple[int, ...]


def gap_vector(instance: BanditInstance) -> GapVector:
    best = max(a.mu for a in instance.arms)
    gaps = tuple(best - a.mu for a in instance.arms)
    optimal = tuple(i for i, g in enumerate(gaps) if g == 0.0)
    return GapVector(gaps=gaps, best_mean=best, optimal=optimal)


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    run_index: int

    def __post_init__(self) -> None:
        if not (0 <= self.master_seed <= _MASK64):
            raise ValueError("master_seed must fit in uint64")
        if self.run_index < 0:
            raise ValueError("run_index must be >= 0")


def _splitmix64(state: int) -> int:
    """One output of the splitmix64 stream whose pre-increment state is `state`."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_run_seed(spec: SeedSpec) -> int:
    """Per-run child seed: decorrelates runs without any sequential dependency.

    The run index is spread by the 64-bit golden-ratio constant and XORed
    into the master seed before the splitmix64 finalizer, so child seeds
    for any (master, index) pair can be computed independently and in any
    order.
    """
    state = spec.master_seed ^ ((_GOLDEN * (spec.run_index + 1)) & _MASK64)
    return _splitmix64(state)


def _builtin(model: str, mus, sigmas) -> BanditInstance:
    return BanditInstance(model=model, arms=tuple(Arm(m, s) for m, s in zip(mus, sigmas)))


# Named instances addressable from the CLI and config files.  The two
# 6-arm sets are the benchmark geometries the acceptance experiments run on.
BUILTIN_INSTANCES: dict[str, BanditInstance] = {
    "paper-uniform-6arm": _builtin(
        "uniform",
        (5.5, 5.0, 4.5, 4.0, 4.75, 3.0),
        (4.5, 5.0, 4.5, 4.0, 3.75, 2.0),
    ),
    "paper-gaussian-6arm": _builtin(
        "gaussian",
        (10.0, 9.0, 8.0, 7.0, -1.0, 0.0),
        (2.0 * math.sqrt(2.0), 1.0, 1.0, math.sqrt(0.5), 1.0, 2.0),
    ),
}


def resolve_instance(name_or_path: str) -> BanditInstance:
    """Look up a built-in instance by name, else load a JSON file."""
    if name_or_path in BUILTIN_INSTANCES:
        return BUILTIN_INSTANCES[name_or_path]
    with open(name_or_path, "r", encoding="utf-8") as fh:
        return instance_from_json(fh.read())
