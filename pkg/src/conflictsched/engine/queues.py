"""Per-worker FIFO run queues with random stealing."""

from __future__ import annotations

import random
import threading
from collections import deque

from ..statements import Transaction


class RunQueues:
    """One FIFO per worker.

    The owner pops its own head; an idle worker steals the head of a uniformly
    chosen non-empty queue that belongs to someone else.
    """

    def __init__(self, count: int):
        if count < 1:
            raise ValueError("need at least one run queue")
        self.fifos: list[deque[Transaction]] = [deque() for _ in range(count)]
        self.backlog = 0
        self.pushed = 0
        self.steals = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.fifos)

    def push(self, queue: int, txn: Transaction) -> None:
        with self._lock:
            self.fifos[queue].append(txn)
            self.backlog += 1
            self.pushed += 1

    def pop(self, worker: int, rng: random.Random) -> tuple[Transaction | None, int, bool]:
        """(txn, queue it came from, stolen); txn is None when every queue is empty."""
        with self._lock:
            own = self.fifos[worker]
            if own:
                self.backlog -= 1
                return own.popleft(), worker, False
            if not self.backlog:
                return None, worker, False
            victims = [q for q, fifo in enumerate(self.fifos) if fifo]
            victim = victims[rng.randrange(len(victims))]
            self.backlog -= 1
            self.steals += 1
            return self.fifos[victim].popleft(), victim, True

    def lengths(self) -> list[int]:
        with self._lock:
            return [len(f) for f in self.fifos]
