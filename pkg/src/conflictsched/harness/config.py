"""Experiment configuration and flag parsing."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import ConfigurationError
from ..scheduler import Mode, PolicyConfig, parse_policy
from ..state import EvictionConfig
from ..workloads import BENCHMARKS, SkewSchedule


@dataclass(frozen=True)
class ThrottleConfig:
    kind: str = "none"  # none | rate | rt
    value: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "ThrottleConfig":
        text = text.strip().lower()
        if text == "none":
            return cls()
        kind, sep, raw = text.partition(":")
        if not sep or kind not in ("rate", "rt"):
            raise ConfigurationError(f"throttle must be none, rate:<tps> or rt:<ms>, got {text!r}")
        try:
            value = float(raw)
        except ValueError:
            raise ConfigurationError(f"bad throttle value {raw!r}") from None
        if value <= 0:
            raise ConfigurationError("throttle value must be positive")
        return cls(kind, value)

    def __str__(self) -> str:
        return "none" if self.kind == "none" else f"{self.kind}:{self.value:g}"


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: str = "tpcc"
    policy: str = "count/max/canonical/single"
    protocol: str = "occ"
    threads: int = 4
    warehouses: int | None = None
    scale: float = 0.1
    phase1_seconds: float = 2.0
    phase2_seconds: float = 10.0
    repetitions: int = 1
    throttle: ThrottleConfig = field(default_factory=ThrottleConfig)
    skew: SkewSchedule = field(default_factory=SkewSchedule)
    continuous: bool = False
    seed: int = 1
    out: str | None = None
    eviction: EvictionConfig | None = None
    regenerate_seconds: float = 60.0
    driver: str = "sim"
    op_cost_us: int = 100
    deadlock: str = "wait-die"
    max_backlog: int = 8192
    dispatch_cost_us: int = 20

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ConfigurationError(f"unknown benchmark {self.benchmark!r}; pick one of {', '.join(BENCHMARKS)}")
        if self.protocol not in ("occ", "2pl"):
            raise ConfigurationError(f"--cc must be occ or 2pl, got {self.protocol!r}")
        if self.threads < 1:
            raise ConfigurationError("--threads must be at least 1")
        if self.warehouses is not None and self.warehouses < 1:
            raise ConfigurationError("--warehouses must be at least 1")
        if self.scale <= 0:
            raise ConfigurationError("--scale must be positive")
        if self.phase1_seconds < 0 or self.phase2_seconds <= 0:
            raise ConfigurationError("phase durations must be positive")
        if self.repetitions < 1:
            raise ConfigurationError("--reps must be at least 1")
        if self.driver not in ("sim", "threads"):
            raise ConfigurationError("--driver must be sim or threads")
        if self.deadlock not in ("wait-die", "no-wait"):
            raise ConfigurationError("--deadlock must be wait-die or no-wait")
        if self.op_cost_us < 1:
            raise ConfigurationError("--op-cost-us must be positive")
        self.policy_config  # validate eagerly

    @property
    def policy_config(self) -> PolicyConfig:
        return parse_policy(self.policy, self.threads)

    @property
    def intelligent(self) -> bool:
        return self.policy_config.mode is Mode.INTELLIGENT

    @property
    def eviction_config(self) -> EvictionConfig:
        return self.eviction if self.eviction is not None else EvictionConfig()

    @property
    def duration_seconds(self) -> float:
        """Measured run length; a skew schedule in continuous mode sets its own."""
        if self.continuous and self.skew.segments:
            return self.skew.duration
        return self.phase2_seconds

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)
