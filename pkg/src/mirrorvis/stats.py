"""Monte Carlo result containers and mergeable accumulators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# trapped fraction above which an estimate is flagged unreliable
UNRELIABLE_TRAPPED = 0.01


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo mean with its standard error.

    ``mean`` and ``stderr`` are already scaled by the total mass of the
    sampled measure, so they estimate the integral itself.
    """

    mean: float
    stderr: float
    n_effective: int
    trapped_fraction: float = 0.0
    discarded_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")
        for name in ("trapped_fraction", "discarded_fraction"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")

    @property
    def unreliable(self) -> bool:
        return self.trapped_fraction > UNRELIABLE_TRAPPED

    @classmethod
    def exact(cls, value: float, seed: int = 0) -> "Estimate":
        return cls(float(value), 0.0, 0, 0.0, 0.0, seed)

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(self.mean * factor, self.stderr * abs(factor),
                        self.n_effective, self.trapped_fraction,
                        self.discarded_fraction, self.seed)

    def sigmas_from(self, value: float) -> float:
        """Signed distance ``(mean - value) / stderr`` (inf-safe)."""
        diff = self.mean - value
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr


@dataclass
class Accumulator:
    """Running ``(sum, sum of squares, count)`` plus trace bookkeeping.

    Merging is associative; callers merge per-block accumulators in block
    order so results do not depend on how blocks were scheduled.
    """

    total: float = 0.0
    total_sq: float = 0.0
    count: int = 0
    exited: int = 0
    trapped: int = 0
    discarded: int = 0

    @classmethod
    def from_values(cls, values, exited=None, trapped=0, discarded=0):
        values = np.asarray(values, dtype=float)
        return cls(float(values.sum()), float(np.dot(values, values)),
                   int(values.size),
                   int(values.size if exited is None else exited),
                   int(trapped), int(discarded))

    def merge(self, other: "Accumulator") -> "Accumulator":
        return Accumulator(self.total + other.total,
                           self.total_sq + other.total_sq,
                           self.count + other.count,
                           self.exited + other.exited,
                           self.trapped + other.trapped,
                           self.discarded + other.discarded)

    def estimate(self, mass: float = 1.0, seed: int = 0) -> Estimate:
        n = self.count
        if n == 0:
            raise ValueError("no samples accumulated")
        mean = self.total / n
        if n > 1:
            var = max(self.total_sq - self.total * mean, 0.0) / (n - 1)
        else:
            var = 0.0
        return Estimate(mass * mean, mass * math.sqrt(var / n), self.exited,
                        self.trapped / n, self.discarded / n, seed)


def merge_all(accs) -> Accumulator:
    out = Accumulator()
    for acc in accs:
        out = out.merge(acc)
    return out
