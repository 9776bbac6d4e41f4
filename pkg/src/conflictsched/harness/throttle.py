"""Admission control for throttled runs."""

from __future__ import annotations

from collections import deque

from .config import ThrottleConfig


class FixedRate:
    """Admit one transaction every ``1/tps`` seconds, starting at time zero."""

    def __init__(self, tps: float):
        self.interval_us = 1e6 / tps
        self.admitted = 0

    def next_admission(self, now_us: int) -> int:
        at = round(self.admitted * self.interval_us)
        self.admitted += 1
        return at

    def observe(self, response_us: int, now_us: int) -> None:
        pass


class ResponseTimeController:
    """Proportional controller holding the rolling mean response time at a target.

    Every ``interval_us`` the admission rate is multiplied by
    ``target / mean``, clamped to [``min_factor``, ``max_factor``], where
    ``mean`` covers the responses observed during that interval only; an
    interval without new commits leaves the rate alone.  A count-based window
    would keep stale overload samples alive once the rate is low and drive
    the rate to the floor.  ``rolling_mean_us`` (last ``window`` commits) is
    kept for reporting.
    """

    def __init__(
        self,
        target_us: float,
        initial_tps: float = 1000.0,
        interval_us: int = 250_000,
        window: int = 200,
        min_factor: float = 0.5,
        max_factor: float = 1.5,
        min_tps: float = 1.0,
    ):
        self.target_us = target_us
        self.rate = initial_tps
        self.interval_us = interval_us
        self.min_factor = min_factor
        self.max_factor = max_factor
        self.min_tps = min_tps
        self.recent: deque[int] = deque(maxlen=window)
        self._next_at = 0.0
        self._next_control = interval_us
        self.rate_history: list[tuple[int, float]] = [(0, initial_tps)]
        self.admitted = 0
        self._fresh = 0
        self._fresh_sum = 0
        self.control_history: list[tuple[int, float, float]] = []  # (time, interval mean, new rate)

    @property
    def rolling_mean_us(self) -> float:
        return sum(self.recent) / len(self.recent) if self.recent else 0.0

    def _control(self, now_us: int) -> None:
        while now_us >= self._next_control:
            if self._fresh:
                interval_mean = self._fresh_sum / self._fresh
                self._fresh = self._fresh_sum = 0
                factor = self.target_us / interval_mean if interval_mean > 0 else self.max_factor
                factor = min(self.max_factor, max(self.min_factor, factor))
                self.rate = max(self.min_tps, self.rate * factor)
                self.control_history.append((self._next_control, interval_mean, self.rate))
            self.rate_history.append((self._next_control, self.rate))
            self._next_control += self.interval_us

    def next_admission(self, now_us: int) -> int:
        self._control(now_us)
        at = max(self._next_at, float(now_us))  # no catch-up bursts after a stall
        self._next_at = at + 1e6 / self.rate
        self.admitted += 1
        return round(at)

    def observe(self, response_us: int, now_us: int) -> None:
        self.recent.append(response_us)
        self._fresh += 1
        self._fresh_sum += response_us
        self._control(now_us)


def make_throttle(cfg: ThrottleConfig):
    if cfg.kind == "rate":
        return FixedRate(cfg.value)
    if cfg.kind == "rt":
        return ResponseTimeController(cfg.value * 1000.0)
    return None
