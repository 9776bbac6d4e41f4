"""Shared workload machinery: specs, mixes, hot spots and skew schedules."""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import accumulate
from typing import Iterable

from ..engine.storage import Database, Schema
from ..errors import ConfigurationError
from ..statements import DomainMap, Statement, Transaction


def scaled(count: int, scale: float) -> int:
    """Table size under a scale factor: rounded up, never below one."""
    return max(1, math.ceil(count * scale - 1e-9))


@dataclass(frozen=True)
class HotSpot:
    probability: float
    low: int
    high: int

    def draw(self, rng: random.Random, n: int) -> int:
        if rng.random() < self.probability:
            return rng.randint(self.low, min(self.high, n))
        return rng.randint(1, n)


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    table_sizes: dict[str, int]
    mix: tuple[tuple[str, int], ...]
    partition_attr: str
    hot_spot: HotSpot | None = None

    def __post_init__(self):
        if sum(p for _, p in self.mix) != 100:
            raise ConfigurationError(f"{self.name}: mix percentages must sum to 100")


@dataclass(frozen=True)
class Distribution:
    kind: str = "uniform"
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "zipf"):
            raise ConfigurationError(f"unknown distribution {self.kind!r}")
        if self.theta < 0:
            raise ConfigurationError("zipf theta must be non-negative")

    def __str__(self) -> str:
        return "uniform" if self.kind == "uniform" else f"zipf{self.theta:g}"


UNIFORM = Distribution()


@lru_cache(maxsize=64)
def _zipf_cdf(n: int, theta: float) -> tuple[float, ...]:
    weights = [1.0 / (k ** theta) for k in range(1, n + 1)]
    total = sum(weights)
    cdf = list(accumulate(w / total for w in weights))
    cdf[-1] = 1.0
    return tuple(cdf)


def zipf_pmf(n: int, theta: float) -> list[float]:
    weights = [1.0 / (k ** theta) for k in range(1, n + 1)]
    total = sum(weights)
    return [w / total for w in weights]


def zipf_draw(rng: random.Random, n: int, theta: float) -> int:
    """Rank in 1..n with P(k) proportional to k**-theta (exact inverse CDF)."""
    if theta == 0:
        return rng.randint(1, n)
    return bisect.bisect_left(_zipf_cdf(n, theta), rng.random()) + 1


@dataclass(frozen=True)
class SkewSchedule:
    segments: tuple[tuple[float, Distribution], ...] = ()

    def __post_init__(self):
        for duration, _ in self.segments:
            if duration <= 0:
                raise ConfigurationError("skew segment durations must be positive")

    @classmethod
    def parse(cls, text: str) -> "SkewSchedule":
        """``"uniform:60,zipf0.3:60,uniform:60"``"""
        segments = []
        for item in filter(None, (p.strip() for p in text.split(","))):
            name, sep, secs = item.partition(":")
            if not sep:
                raise ConfigurationError(f"skew segment {item!r} needs a duration")
            name = name.strip().lower()
            try:
                duration = float(secs)
                if name == "uniform":
                    dist = UNIFORM
                elif name.startswith("zipf"):
                    dist = Distribution("zipf", float(name[4:] or 0.99))
                else:
                    raise ValueError(name)
            except ValueError:
                raise ConfigurationError(f"cannot parse skew segment {item!r}") from None
            segments.append((duration, dist))
        return cls(tuple(segments))

    @property
    def duration(self) -> float:
        return sum(d for d, _ in self.segments)

    def boundaries(self) -> list[float]:
        return list(accumulate(d for d, _ in self.segments))

    def at(self, now: float) -> Distribution:
        """Distribution in force at ``now`` seconds; the last segment persists."""
        elapsed = 0.0
        for duration, dist in self.segments:
            elapsed += duration
            if now < elapsed:
                return dist
        return self.segments[-1][1] if self.segments else UNIFORM

    def __str__(self) -> str:
        return ",".join(f"{d}:{s:g}" for s, d in self.segments)


@dataclass
class Workload:
    """A benchmark: schema, population and transaction generator.

    Generation is a pure function of the rng passed in and the schedule time.
    """

    spec: BenchmarkSpec
    schema: Schema = field(repr=False)
    skew: SkewSchedule = field(default_factory=SkewSchedule)
    next_id: int = 1

    def __post_init__(self):
        names = [name for name, _ in self.spec.mix]
        self._names = names
        self._cum = list(accumulate(p for _, p in self.spec.mix))

    @property
    def domain_map(self) -> DomainMap:
        return self.schema.domain_map

    def make_database(self, rng: random.Random) -> Database:
        db = Database(self.schema)
        self.populate(db, rng)
        return db

    def populate(self, db: Database, rng: random.Random) -> None:
        raise NotImplementedError

    def partitions(self) -> int:
        """Size of the partition-attribute domain."""
        raise NotImplementedError

    def draw_type(self, rng: random.Random) -> str:
        return self._names[bisect.bisect_right(self._cum, rng.random() * 100)]

    def draw_partition(self, rng: random.Random, now: float) -> int:
        """Partition-attribute value: Zipf in a Zipf segment, else hot spot or uniform."""
        n = self.partitions()
        dist = self.skew.at(now)
        if dist.kind == "zipf":
            return zipf_draw(rng, n, dist.theta)
        if self.spec.hot_spot is not None:
            return self.spec.hot_spot.draw(rng, n)
        return rng.randint(1, n)

    def build(self, txn_type: str, rng: random.Random, now: float) -> tuple[list[Statement], int]:
        raise NotImplementedError

    def next_transaction(self, rng: random.Random, now: float = 0.0) -> Transaction:
        txn_type = self.draw_type(rng)
        statements, partition = self.build(txn_type, rng, now)
        txn = Transaction(self.next_id, txn_type, tuple(statements), partition_key=partition)
        self.next_id += 1
        return txn

    def check_statements(self, statements: Iterable[Statement]) -> None:
        for stmt in statements:
            self.schema.check(stmt)
