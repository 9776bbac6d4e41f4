"""Benchmark generators and populators."""

from __future__ import annotations

from ..errors import ConfigurationError
from .base import BenchmarkSpec, Distribution, HotSpot, SkewSchedule, Workload, scaled, zipf_draw, zipf_pmf
from .micro import Partitioned
from .smallbank import SmallBank
from .tatp import Tatp
from .tpcc import Tpcc

BENCHMARKS = ("tpcc", "smallbank", "tatp")


def make_workload(
    name: str, scale: float = 1.0, warehouses: int | None = None, skew: SkewSchedule | None = None
) -> Workload:
    if name == "tpcc":
        return Tpcc(scale, warehouses, skew)
    if name == "smallbank":
        return SmallBank(scale, skew)
    if name == "tatp":
        return Tatp(scale, skew)
    raise ConfigurationError(f"unknown benchmark {name!r}")


__all__ = [
    "BENCHMARKS", "BenchmarkSpec", "Distribution", "HotSpot", "Partitioned", "SkewSchedule", "SmallBank",
    "Tatp", "Tpcc", "Workload", "make_workload", "scaled", "zipf_draw", "zipf_pmf",
]
