"""Row lock table for strict two-phase locking with wait-die deadlock avoidance."""

from __future__ import annotations

import enum
import threading

from .storage import RowKey


class LockMode(enum.IntEnum):
    SHARED = 1
    EXCLUSIVE = 2


class Grant(enum.Enum):
    GRANTED = "granted"
    WAIT = "wait"
    DIE = "die"


class LockManager:
    """Lock table keyed by (table, key); the key need not hold a row yet.

    Owners are identified by their age stamp: a smaller stamp is older.  On a
    conflict an older requester waits and a younger one dies (``wait-die``);
    ``no-wait`` makes every conflicting requester die.  Waiting happens outside
    this class: the caller gets ``WAIT`` and retries after a release, which the
    ``epoch`` counter and :meth:`wait_for_release` make race-free for threads.
    """

    def __init__(self, policy: str = "wait-die"):
        if policy not in ("wait-die", "no-wait"):
            raise ValueError(f"unknown deadlock policy {policy!r}")
        self.policy = policy
        self._table: dict[RowKey, dict[int, LockMode]] = {}
        self._held: dict[int, list[RowKey]] = {}
        self._cond = threading.Condition()
        self.epoch = 0

    def acquire(self, owner: int, key: RowKey, mode: LockMode) -> Grant:
        with self._cond:
            holders = self._table.get(key)
            if holders is None:
                self._table[key] = {owner: mode}
                self._held.setdefault(owner, []).append(key)
                return Grant.GRANTED
            held = holders.get(owner)
            if held is not None and held >= mode:
                return Grant.GRANTED
            conflicting = [h for h, m in holders.items() if h != owner and (m is LockMode.EXCLUSIVE or mode is LockMode.EXCLUSIVE)]
            if not conflicting:
                holders[owner] = mode
                if held is None:
                    self._held.setdefault(owner, []).append(key)
                return Grant.GRANTED
            if self.policy == "wait-die" and all(owner < h for h in conflicting):
                return Grant.WAIT
            return Grant.DIE

    def release_all(self, owner: int) -> list[RowKey]:
        with self._cond:
            keys = self._held.pop(owner, [])
            for key in keys:
                holders = self._table.get(key)
                if holders is None:
                    continue
                holders.pop(owner, None)
                if not holders:
                    del self._table[key]
            if keys:
                self.epoch += 1
                self._cond.notify_all()
            return keys

    def wait_for_release(self, epoch: int, timeout: float) -> None:
        with self._cond:
            if self.epoch == epoch:
                self._cond.wait(timeout)

    def holders(self, key: RowKey) -> dict[int, LockMode]:
        with self._cond:
            return dict(self._table.get(key, {}))

    def held_by(self, owner: int) -> list[RowKey]:
        with self._cond:
            return list(self._held.get(owner, []))
