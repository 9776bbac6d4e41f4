"""Run metrics collected from engine events."""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass, field

from ..engine.protocols import WRITE_REASONS, AbortReason, Status, TxnOutcome
from ..statements import Transaction


@dataclass
class Metrics:
    """Counters for one measured run.

    ``aborts`` counts every retryable failed attempt; duplicate-key failures
    are kept apart in ``failed_no_retry`` and stay out of the abort rate.
    """

    duration_s: float = 0.0
    commits: int = 0
    aborts: int = 0
    failed_no_retry: int = 0
    write_aborts: int = 0
    read_aborts: int = 0
    finished: int = 0
    stolen: int = 0
    response_us: Counter = field(default_factory=Counter)
    per_txn_type: dict[str, list[int]] = field(default_factory=dict)
    commits_per_second: Counter = field(default_factory=Counter)
    aborts_per_second: Counter = field(default_factory=Counter)
    commit_log: list[Transaction] | None = None

    # --- engine observer ------------------------------------------------------

    def on_attempt(self, txn: Transaction, status: Status, reason: AbortReason, now_us: int, worker: int) -> None:
        second = now_us // 1_000_000
        counts = self.per_txn_type.get(txn.txn_type)
        if counts is None:
            counts = self.per_txn_type[txn.txn_type] = [0, 0]
        if status is Status.COMMITTED:
            self.commits += 1
            counts[0] += 1
            self.commits_per_second[second] += 1
            self.response_us[now_us - txn.arrival_time] += 1
            if self.commit_log is not None:
                self.commit_log.append(txn)
        elif status is Status.ABORTED:
            self.aborts += 1
            counts[1] += 1
            self.aborts_per_second[second] += 1
            if reason in WRITE_REASONS:
                self.write_aborts += 1
            elif reason is AbortReason.READ_VALIDATION:
                self.read_aborts += 1
        else:
            self.failed_no_retry += 1

    def on_finish(self, txn: Transaction, outcome: TxnOutcome, now_us: int) -> None:
        self.finished += 1
        self.stolen += outcome.stolen

    # --- derived --------------------------------------------------------------

    @property
    def attempts(self) -> int:
        return self.commits + self.aborts + self.failed_no_retry

    @property
    def abort_rate(self) -> float:
        total = self.aborts + self.commits
        return self.aborts / total if total else 0.0

    @property
    def tps(self) -> float:
        return self.commits / self.duration_s if self.duration_s > 0 else 0.0

    @property
    def mean_rt_us(self) -> float:
        n = sum(self.response_us.values())
        return sum(rt * c for rt, c in self.response_us.items()) / n if n else 0.0

    def percentile_rt_us(self, p: float) -> float:
        """Nearest-rank percentile of commit response times."""
        n = sum(self.response_us.values())
        if not n:
            return 0.0
        rank = max(1, math.ceil(p / 100 * n))
        seen = 0
        for rt in sorted(self.response_us):
            seen += self.response_us[rt]
            if seen >= rank:
                return float(rt)
        return float(max(self.response_us))

    @property
    def p99_rt_us(self) -> float:
        return self.percentile_rt_us(99)

    @property
    def stolen_fraction(self) -> float:
        return self.stolen / self.finished if self.finished else 0.0

    def committed(self, txn_type: str) -> int:
        return self.per_txn_type.get(txn_type, [0, 0])[0]

    def series(self, seconds: int) -> list[tuple[int, int, float]]:
        """(second, commits, abort rate) for each whole second of the run."""
        rows = []
        for s in range(seconds):
            c, a = self.commits_per_second.get(s, 0), self.aborts_per_second.get(s, 0)
            rows.append((s, c, a / (a + c) if a + c else 0.0))
        return rows


def mean(values: list[float]) -> float:
    return statistics.fmean(values) if values else 0.0


def rse(values: list[float]) -> float:
    """Relative standard error: sample stdev / (mean * sqrt(n)); 0 when undefined."""
    n = len(values)
    m = mean(values)
    if n < 2 or m == 0:
        return 0.0
    return statistics.stdev(values) / (abs(m) * math.sqrt(n))
