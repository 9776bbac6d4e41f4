"""Real-thread driver over the same protocol step machines.

Wall-clock timings under the GIL are not meaningful for throughput
comparisons and runs are not reproducible; this driver exists to exercise
the protocols under genuine preemptive interleaving.
"""

from __future__ import annotations

import random
import threading
import time
from typing import Callable

from ..history import History
from .protocols import BLOCK, RUN, Protocol, Status, TwoPhaseLocking, TxnOutcome
from .queues import RunQueues
from .sim import Dispatch, NullObserver, Observer, Throttle


class ThreadedEngine:
    def __init__(
        self,
        protocol: Protocol,
        workers: int,
        seed: int = 0,
        history: History | None = None,
        observer: Observer | None = None,
        op_cost_us: int = 0,
    ):
        self.protocol = protocol
        self.workers = workers
        self.queues = RunQueues(workers)
        self.seed = seed
        self.history = history
        self.observer = observer or NullObserver()
        self.op_cost_us = op_cost_us
        self._work = threading.Condition()
        self._space = threading.Condition()
        self._stop = threading.Event()
        self._observer_lock = threading.Lock()
        self._t0 = time.perf_counter_ns()
        self.max_idle_with_work_us = 0
        self._idle_since: dict[int, int | None] = {}

    @property
    def now(self) -> int:
        return (time.perf_counter_ns() - self._t0) // 1000

    def push(self, queue: int, txn) -> None:
        self.queues.push(queue, txn)
        with self._work:
            now = self.now
            for w, since in self._idle_since.items():
                if since is None:
                    self._idle_since[w] = now
            self._work.notify_all()

    def _pause(self, units: int) -> None:
        if self.op_cost_us:
            time.sleep(units * self.op_cost_us / 1e6)

    def _worker(self, index: int) -> None:
        rng = random.Random(self.seed * 1000 + index)
        protocol, observer, history = self.protocol, self.observer, self.history
        while not self._stop.is_set():
            txn, queue, stolen = self.queues.pop(index, rng)
            if txn is None:
                with self._work:
                    self._idle_since.setdefault(index, None)
                    if not self.queues.backlog:
                        self._work.wait(0.005)
                continue
            with self._work:
                since = self._idle_since.pop(index, None)
                if since is not None:
                    self.max_idle_with_work_us = max(self.max_idle_with_work_us, self.now - since)
            with self._space:
                self._space.notify_all()
            retries = 0
            while True:
                attempt = protocol.begin(txn, self.now)
                while True:
                    result = protocol.step(attempt)
                    if result[0] is RUN:
                        self._pause(result[1])
                    elif result[0] is BLOCK:
                        assert isinstance(protocol, TwoPhaseLocking)
                        protocol.locks.wait_for_release(result[2], 0.01)
                    else:
                        break
                protocol.finish(attempt)
                status, reason = result[1], result[2]
                if history is not None and txn.refs:
                    if status is Status.COMMITTED:
                        history.record_commit(txn.refs)
                    else:
                        history.record_abort(txn.refs)
                with self._observer_lock:
                    observer.on_attempt(txn, status, reason, self.now, index)
                if status is Status.ABORTED:
                    retries += 1
                    txn.retry_count = retries
                    continue
                break
            with self._observer_lock:
                observer.on_finish(txn, TxnOutcome(status, reason, retries, queue, stolen), self.now)

    def _dispatcher(self, produce: Callable[[int], Dispatch], max_backlog: int, throttle: Throttle | None) -> None:
        while not self._stop.is_set():
            if throttle is not None:
                wait = throttle.next_admission(self.now) - self.now
                if wait > 0:
                    time.sleep(wait / 1e6)
                    continue
            if self.queues.backlog >= max_backlog:
                with self._space:
                    self._space.wait(0.005)
                continue
            d = produce(self.now)
            self.push(d.queue, d.txn)

    def run(
        self,
        duration_us: int,
        produce: Callable[[int], Dispatch] | None = None,
        max_backlog: int = 8192,
        throttle: Throttle | None = None,
        drain: bool = False,
    ) -> None:
        """Run for ``duration_us``; with ``drain`` stop as soon as every queue is empty."""
        threads = [threading.Thread(target=self._worker, args=(w,), daemon=True) for w in range(self.workers)]
        if produce is not None:
            threads.append(
                threading.Thread(target=self._dispatcher, args=(produce, max_backlog, throttle), daemon=True)
            )
        self._t0 = time.perf_counter_ns()
        for t in threads:
            t.start()
        deadline = time.perf_counter() + duration_us / 1e6
        while time.perf_counter() < deadline:
            if drain and not self.queues.backlog and self.protocol.attempts and self._all_idle():
                break
            time.sleep(0.001)
        self._stop.set()
        with self._work:
            self._work.notify_all()
        for t in threads:
            t.join()

    def _all_idle(self) -> bool:
        with self._work:
            return len(self._idle_since) == self.workers
