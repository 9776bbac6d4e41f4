"""Reference -> per-queue occurrence counts, with stability-gated eviction."""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass
from typing import IO, Iterable

from .statements import Reference

_STRIPES = 64


class StateEntry:
    __slots__ = ("queue_counts", "rate", "total", "argmax", "last_touched")

    def __init__(self, queue_count: int, now: float = 0.0):
        self.queue_counts = [0] * queue_count
        self.rate = 0.0
        self.total = 0
        self.argmax = 0
        self.last_touched = now

    def rate_at(self, now: float, decay: float) -> float:
        dt = now - self.last_touched
        return self.rate * math.exp(-decay * dt) if dt > 0 else self.rate

    def __repr__(self) -> str:
        return (
            f"StateEntry(counts={self.queue_counts}, R={self.rate:.3f}, "
            f"T={self.total}, Q={self.argmax})"
        )


@dataclass
class EvictionConfig:
    """Stable-delete thresholds.

    An entry is evicted when its decayed arrival rate is below ``r_min``, its
    total is below ``t_min`` and its argmax queue holds more than ``q_hot``
    references.  ``q_hot=None`` means the 75th percentile of current queue
    totals.  With ``gate=False`` eviction starts immediately (direct-delete).
    ``cap`` is a hard bound enforced independently of the gate.
    """

    r_min: float = 0.5
    t_min: int = 5
    q_hot: float | None = None
    window: float = 5.0
    delta: float = 0.02
    cap: int = 100_000
    gate: bool = True
    interval: float = 0.5
    enabled: bool = True

    @classmethod
    def parse(cls, text: str) -> "EvictionConfig":
        """Parse ``"r=0.5,t=5,window=5,q=100,cap=5000,gate=off"``; ``"off"`` disables eviction."""
        cfg = cls()
        if text.strip().lower() in ("off", "none"):
            cfg.enabled = False
            return cfg
        keys = {"r": "r_min", "t": "t_min", "q": "q_hot", "window": "window",
                "delta": "delta", "cap": "cap", "gate": "gate", "interval": "interval"}
        for item in filter(None, (p.strip() for p in text.split(","))):
            name, sep, raw = item.partition("=")
            if not sep or name.strip() not in keys:
                raise ValueError(f"bad eviction setting {item!r}")
            field_name = keys[name.strip()]
            raw = raw.strip()
            if field_name == "gate":
                if raw not in ("on", "off"):
                    raise ValueError(f"gate must be on or off, got {raw!r}")
                cfg.gate = raw == "on"
            elif field_name in ("t_min", "cap"):
                setattr(cfg, field_name, int(raw))
            else:
                setattr(cfg, field_name, float(raw))
        return cfg


class StabilityGate:
    """Opens once the windowed global abort rate stops moving.

    Fed cumulative (aborts, commits) counters; compares the abort rate of
    consecutive ``window``-second windows and latches open when the absolute
    change drops below ``delta``.
    """

    def __init__(self, window: float = 5.0, delta: float = 0.02, enabled: bool = True):
        self.window = window
        self.delta = delta
        self.is_open = not enabled
        self._window_start = 0.0
        self._base = (0, 0)
        self._previous_rate: float | None = None

    def observe(self, now: float, aborts: int, commits: int) -> bool:
        if self.is_open:
            return True
        if now - self._window_start < self.window:
            return False
        d_aborts, d_commits = aborts - self._base[0], commits - self._base[1]
        attempts = d_aborts + d_commits
        rate = d_aborts / attempts if attempts else 0.0
        if self._previous_rate is not None and abs(rate - self._previous_rate) < self.delta:
            self.is_open = True
        self._previous_rate = rate
        self._window_start = now
        self._base = (aborts, commits)
        return self.is_open


class State:
    """Per-reference queue counts plus the per-queue ``total`` row.

    Counts are cumulative: they grow when a transaction is queued and only
    eviction removes them.  Updates to one entry are atomic; the totals row is
    kept under its own lock and may briefly disagree with the entries.
    """

    def __init__(self, queue_count: int, half_life: float = 1.0):
        if queue_count < 1:
            raise ValueError("need at least one queue")
        self.queue_count = queue_count
        self.entries: dict[Reference, StateEntry] = {}
        self.total_per_queue = [0] * queue_count
        self.decay = math.log(2) / half_life
        self._locks = [threading.Lock() for _ in range(_STRIPES)]
        self._totals_lock = threading.Lock()

    def on_enqueue(self, refs: Iterable[Reference], queue: int, now: float) -> None:
        if not 0 <= queue < self.queue_count:
            raise IndexError(f"queue {queue} out of range")
        n = 0
        decay = self.decay
        for ref in refs:
            n += 1
            with self._locks[hash(ref) % _STRIPES]:
                entry = self.entries.get(ref)
                if entry is None:
                    entry = self.entries[ref] = StateEntry(self.queue_count, now)
                counts = entry.queue_counts
                counts[queue] += 1
                entry.total += 1
                entry.rate = entry.rate_at(now, decay) + decay
                entry.last_touched = now
                best = entry.argmax
                if counts[queue] > counts[best] or (counts[queue] == counts[best] and queue < best):
                    entry.argmax = queue
        if n:
            with self._totals_lock:
                self.total_per_queue[queue] += n

    def queue_counts(self, ref: Reference) -> list[int]:
        entry = self.entries.get(ref)
        return list(entry.queue_counts) if entry is not None else [0] * self.queue_count

    def get(self, ref: Reference) -> StateEntry | None:
        return self.entries.get(ref)

    def least_loaded_queue(self, among: Iterable[int] | None = None) -> int:
        totals = self.total_per_queue
        candidates = range(self.queue_count) if among is None else among
        return min(candidates, key=lambda q: (totals[q], q))

    def _remove(self, ref: Reference) -> bool:
        with self._locks[hash(ref) % _STRIPES]:
            entry = self.entries.pop(ref, None)
        if entry is None:
            return False
        with self._totals_lock:
            for q, c in enumerate(entry.queue_counts):
                self.total_per_queue[q] -= c
        return True

    def hot_threshold(self, q_hot: float | None) -> float:
        if q_hot is not None:
            return q_hot
        totals = sorted(self.total_per_queue)
        # 75th percentile, linear interpolation between closest ranks
        pos = 0.75 * (len(totals) - 1)
        lo = math.floor(pos)
        hi = min(lo + 1, len(totals) - 1)
        return totals[lo] + (totals[hi] - totals[lo]) * (pos - lo)

    def evict_stale(self, now: float, r_min: float = 0.5, t_min: int = 5, q_hot: float | None = None) -> int:
        """Remove low-rate, low-total entries whose argmax queue is crowded."""
        hot = self.hot_threshold(q_hot)
        totals = self.total_per_queue
        doomed = [
            ref
            for ref, e in list(self.entries.items())
            if e.rate_at(now, self.decay) < r_min and e.total < t_min and totals[e.argmax] > hot
        ]
        return sum(self._remove(ref) for ref in doomed)

    def enforce_cap(self, now: float, cap: int, low_water: float = 0.9) -> int:
        """Hard memory bound.

        Once the table exceeds ``cap`` it is cut to ``low_water * cap`` by
        dropping the coldest entries (lowest decayed rate, then lowest total),
        so the sort is amortized over many enqueues.
        """
        if len(self.entries) <= cap:
            return 0
        keep = int(cap * low_water)
        cold = sorted((e.rate_at(now, self.decay), e.total, ref) for ref, e in list(self.entries.items()))
        return sum(self._remove(ref) for _, _, ref in cold[: len(cold) - keep])

    def __len__(self) -> int:
        return len(self.entries)

    def snapshot(self, now: float | None = None) -> list[tuple]:
        rows = []
        for ref, e in sorted(list(self.entries.items())):
            rate = e.rate if now is None else e.rate_at(now, self.decay)
            rows.append((ref, *e.queue_counts, round(rate, 6), e.total, e.argmax))
        return rows

    def to_csv(self, fh: IO[str], now: float | None = None) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["reference", *(f"q{q}" for q in range(self.queue_count)), "R", "T", "Q"])
        writer.writerows(self.snapshot(now))
