"""Deterministic discrete-event driver.

Workers, the dispatcher and housekeeping tasks are generator coroutines over a
virtual microsecond clock.  Every row access costs ``op_cost_us`` (with a small
seeded jitter), so interleavings and therefore conflicts arise exactly as they
would between real threads, but a run is a pure function of its seeds.

A coroutine yields either an ``int`` (sleep that many microseconds) or one of
the park channels below; it is resumed when that channel is notified.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Protocol as TypingProtocol

from ..history import History
from ..statements import Transaction
from .protocols import BLOCK, DONE, RUN, Protocol, Status, TxnOutcome
from .queues import RunQueues

WORK, POP, RELEASE = "work", "pop", "release"


class Observer(TypingProtocol):
    def on_attempt(self, txn: Transaction, status: Status, reason, now_us: int, worker: int) -> None: ...

    def on_finish(self, txn: Transaction, outcome: TxnOutcome, now_us: int) -> None: ...


class NullObserver:
    def on_attempt(self, txn, status, reason, now_us, worker):
        pass

    def on_finish(self, txn, outcome, now_us):
        pass


@dataclass
class Dispatch:
    """What the dispatcher produced for one transaction."""

    txn: Transaction
    queue: int
    cost_us: int


class Throttle(TypingProtocol):
    def next_admission(self, now_us: int) -> int: ...

    def observe(self, response_us: int, now_us: int) -> None: ...


class Simulation:
    def __init__(
        self,
        protocol: Protocol,
        workers: int,
        rng: random.Random,
        op_cost_us: int = 100,
        jitter: float = 0.2,
        history: History | None = None,
        observer: Observer | None = None,
    ):
        if workers < 1:
            raise ValueError("need at least one worker")
        self.protocol = protocol
        self.workers = workers
        self.queues = RunQueues(workers)
        self.rng = rng
        self.op_cost_us = op_cost_us
        self.spread = max(0, int(op_cost_us * jitter))
        self.history = history
        self.observer = observer or NullObserver()
        self.now = 0
        self._heap: list[tuple[int, int, Iterator]] = []
        self._seq = 0
        self._parked: dict[str, list[Iterator]] = {WORK: [], POP: [], RELEASE: []}
        self.idle_workers: dict[int, int | None] = {}
        self.max_idle_with_work_us = 0
        self.throttle: Throttle | None = None

    # --- kernel ------------------------------------------------------------------

    def _schedule(self, actor: Iterator, at: int) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, actor))

    def notify(self, channel: str) -> None:
        parked = self._parked[channel]
        if parked:
            self._parked[channel] = []
            for actor in parked:
                self._schedule(actor, self.now)

    def spawn(self, actor: Iterator, at: int = 0) -> None:
        self._schedule(actor, at)

    def run(self, until_us: int) -> None:
        heap = self._heap
        while heap and heap[0][0] <= until_us:
            at, _, actor = heapq.heappop(heap)
            self.now = at
            try:
                command = next(actor)
            except StopIteration:
                continue
            if isinstance(command, int):
                self._schedule(actor, at + command)
            else:
                self._parked[command].append(actor)
        self.now = max(self.now, until_us)

    def cost(self, units: int = 1) -> int:
        base = units * self.op_cost_us
        if self.spread:
            base += self.rng.randint(-self.spread, self.spread)
        return max(1, base)

    # --- actors ------------------------------------------------------------------

    def push(self, queue: int, txn: Transaction) -> None:
        self.queues.push(queue, txn)
        for w, since in self.idle_workers.items():
            if since is None:
                self.idle_workers[w] = self.now
        self.notify(WORK)

    def worker(self, index: int) -> Iterator:
        protocol, queues, observer, history = self.protocol, self.queues, self.observer, self.history
        while True:
            txn, queue, stolen = queues.pop(index, self.rng)
            if txn is None:
                self.idle_workers[index] = None
                yield WORK
                continue
            since = self.idle_workers.pop(index, None)
            if since is not None:
                self.max_idle_with_work_us = max(self.max_idle_with_work_us, self.now - since)
            self.notify(POP)
            retries = 0
            while True:
                attempt = protocol.begin(txn, self.now)
                while True:
                    result = protocol.step(attempt)
                    kind = result[0]
                    if kind is RUN:
                        yield self.cost(result[1])
                    elif kind is BLOCK:
                        yield RELEASE
                    else:
                        break
                if protocol.finish(attempt):
                    self.notify(RELEASE)
                status, reason = result[1], result[2]
                if history is not None and txn.refs:
                    if status is Status.COMMITTED:
                        history.record_commit(txn.refs)
                    else:
                        history.record_abort(txn.refs)
                observer.on_attempt(txn, status, reason, self.now, index)
                yield self.cost(1)
                if status is Status.ABORTED:
                    retries += 1
                    txn.retry_count = retries
                    continue
                break
            outcome = TxnOutcome(status, reason, retries, queue, stolen)
            observer.on_finish(txn, outcome, self.now)
            if self.throttle is not None and status is Status.COMMITTED:
                self.throttle.observe(self.now - txn.arrival_time, self.now)

    def dispatcher(
        self,
        produce: Callable[[int], Dispatch],
        max_backlog: int = 8192,
        throttle: Throttle | None = None,
    ) -> Iterator:
        self.throttle = throttle
        queues = self.queues
        while True:
            if throttle is not None:
                wait = throttle.next_admission(self.now) - self.now
                if wait > 0:
                    yield wait
            while queues.backlog >= max_backlog:
                yield POP
            d = produce(self.now)
            if d.cost_us > 0:
                yield d.cost_us
            self.push(d.queue, d.txn)

    def periodic(self, interval_us: int, fn: Callable[[int], None], start_us: int | None = None) -> Iterator:
        if start_us is not None and start_us > self.now:
            yield start_us - self.now
        while True:
            yield interval_us
            fn(self.now)

    def start_workers(self) -> None:
        for w in range(self.workers):
            self.spawn(self.worker(w))
