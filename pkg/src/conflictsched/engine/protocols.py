"""OCC and strict 2PL as resumable step machines.

Each call to :meth:`Protocol.step` performs at most one row access (or the
commit) and reports what happened, so a deterministic simulator and a thread
pool can drive the same code.  Step results are plain tuples:

``(RUN, units)``
    the step did work costing ``units`` row operations;
``(BLOCK, row_key, epoch)``
    a 2PL lock must be waited for; retry the step after a release;
``(DONE, status, reason)``
    the attempt finished.
"""

from __future__ import annotations

import contextlib
import enum
import threading
from dataclasses import dataclass
from typing import Any

from ..statements import Expr, StmtKind, Transaction
from .locks import Grant, LockManager, LockMode
from .storage import ABSENT, Database, RowKey

RUN, BLOCK, DONE = "run", "block", "done"


class Status(enum.Enum):
    COMMITTED = "committed"
    ABORTED = "aborted"
    FAILED_NO_RETRY = "failed_no_retry"


class AbortReason(enum.Enum):
    NONE = "none"
    READ_VALIDATION = "read_validation"
    WRITE_CONFLICT = "write_conflict"
    LOCK_CONFLICT = "lock_conflict"
    DUPLICATE_KEY = "duplicate_key"


WRITE_REASONS = frozenset({AbortReason.WRITE_CONFLICT, AbortReason.LOCK_CONFLICT})


@dataclass
class TxnOutcome:
    status: Status
    abort_reason: AbortReason
    retries_used: int
    queue_executed: int
    stolen: bool


class Attempt:
    """One execution attempt of a transaction."""

    __slots__ = ("txn", "age", "pc", "ctx", "reads", "writes", "started")

    def __init__(self, txn: Transaction, age: int, started: int = 0):
        self.txn = txn
        self.age = age
        self.pc = 0
        self.ctx: dict[str, Any] = {}
        self.reads: dict[RowKey, int] = {}
        self.writes: dict[RowKey, dict[str, Any] | None] = {}
        self.started = started


def _eval(value, row, ctx):
    return value.evaluate(row, ctx) if isinstance(value, Expr) else value


class Protocol:
    name = "base"

    def __init__(self, db: Database, concurrent: bool = False):
        self.db = db
        self.concurrent = concurrent
        self.attempts = 0
        self._latches: dict[RowKey, threading.Lock] = {}
        self._latch_guard = threading.Lock()

    def begin(self, txn: Transaction, started: int = 0) -> Attempt:
        return Attempt(txn, txn.txn_id, started)

    # --- shared statement semantics -------------------------------------------

    def _visible(self, attempt: Attempt, rk: RowKey) -> dict[str, Any] | None:
        """Row as this attempt sees it: own buffered write first, else committed."""
        if rk in attempt.writes:
            return attempt.writes[rk]
        version, cols = self.db.read(*rk)
        self._note_read(attempt, rk, version)
        return cols

    def _note_read(self, attempt: Attempt, rk: RowKey, version: int) -> None:
        pass

    def _doomed(self, attempt: Attempt) -> AbortReason | None:
        """Reason the attempt can no longer commit, if already known."""
        return None

    def _execute(self, attempt: Attempt, stmt) -> tuple | None:
        """Apply one statement to the attempt's private state.

        Returns a DONE tuple when the statement ends the attempt, else None.
        """
        db, ctx = self.db, attempt.ctx
        if stmt.kind is StmtKind.INSERT:
            key, image = db.insert_image(stmt, ctx)
            rk = (stmt.table, key)
            if self._visible(attempt, rk) is not None:
                doomed = self._doomed(attempt)
                if doomed is not None:
                    return (DONE, Status.ABORTED, doomed)
                return (DONE, Status.FAILED_NO_RETRY, AbortReason.DUPLICATE_KEY)
            attempt.writes[rk] = image
            return None
        key, residual = db.point_key(stmt, ctx)
        rk = (stmt.table, key)
        row = self._visible(attempt, rk)
        if row is not None and residual and any(row.get(a) != v for a, v in residual):
            row = None
        if stmt.kind is StmtKind.SELECT:
            for column, var in stmt.binds:
                ctx[var] = None if row is None else row.get(column)
        elif stmt.kind is StmtKind.UPDATE:
            if row is not None:
                image = dict(row)
                for attr, value in stmt.assignments + stmt.payload:
                    image[attr] = _eval(value, row, ctx)
                attempt.writes[rk] = image
        elif row is not None:  # DELETE
            attempt.writes[rk] = None
        return None

    def _latched(self, keys):
        if not self.concurrent:
            return contextlib.nullcontext()
        stack = contextlib.ExitStack()
        with self._latch_guard:
            locks = [self._latches.setdefault(k, threading.Lock()) for k in keys]
        for lock in locks:
            stack.enter_context(lock)
        return stack

    def _install(self, attempt: Attempt) -> None:
        for (table, key), image in sorted(attempt.writes.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            self.db.install(table, key, image)

    def step(self, attempt: Attempt) -> tuple:
        raise NotImplementedError

    def finish(self, attempt: Attempt) -> list[RowKey]:
        """Release whatever the attempt holds; returns released lock keys."""
        return []


class OCC(Protocol):
    """Backward validation: commit succeeds iff every row read is unchanged.

    Write-set and read-set rows are latched in global key order for the
    validate-and-install critical section.
    """

    name = "occ"

    def _note_read(self, attempt, rk, version):
        attempt.reads.setdefault(rk, version)

    def _doomed(self, attempt):
        # a key collision seen through stale reads is a conflict, not a duplicate
        stale = [rk for rk, v in attempt.reads.items() if self.db.version(*rk) != v]
        if not stale:
            return None
        if any(rk in attempt.writes for rk in stale):
            return AbortReason.WRITE_CONFLICT
        return AbortReason.READ_VALIDATION

    def step(self, attempt: Attempt) -> tuple:
        statements = attempt.txn.statements
        if attempt.pc < len(statements):
            stmt = statements[attempt.pc]
            attempt.pc += 1
            done = self._execute(attempt, stmt)
            if done is not None:
                self.attempts += 1
                return done
            return (RUN, 1)
        self.attempts += 1
        return self._commit(attempt)

    def _commit(self, attempt: Attempt) -> tuple:
        keys = sorted(set(attempt.reads) | set(attempt.writes), key=lambda rk: (rk[0], rk[1]))
        with self._latched(keys):
            stale = [rk for rk in keys if rk in attempt.reads and self.db.version(*rk) != attempt.reads[rk]]
            if stale:
                written = any(rk in attempt.writes for rk in stale)
                reason = AbortReason.WRITE_CONFLICT if written else AbortReason.READ_VALIDATION
                return (DONE, Status.ABORTED, reason)
            # blind inserts: key must still be free
            for rk in attempt.writes:
                if rk not in attempt.reads and self.db.version(*rk) != ABSENT:
                    return (DONE, Status.ABORTED, AbortReason.WRITE_CONFLICT)
            self._install(attempt)
        return (DONE, Status.COMMITTED, AbortReason.NONE)


class TwoPhaseLocking(Protocol):
    """Strict 2PL: S locks for reads, X for writes, all held until the end."""

    name = "2pl"

    def __init__(self, db: Database, concurrent: bool = False, deadlock: str = "wait-die"):
        super().__init__(db, concurrent)
        self.locks = LockManager(deadlock)

    def _lock_key(self, attempt: Attempt, stmt) -> RowKey:
        if stmt.kind is StmtKind.INSERT:
            key, _ = self.db.insert_image(stmt, attempt.ctx)
        else:
            key, _ = self.db.point_key(stmt, attempt.ctx)
        return (stmt.table, key)

    def step(self, attempt: Attempt) -> tuple:
        statements = attempt.txn.statements
        if attempt.pc < len(statements):
            stmt = statements[attempt.pc]
            rk = self._lock_key(attempt, stmt)
            mode = LockMode.SHARED if stmt.kind is StmtKind.SELECT else LockMode.EXCLUSIVE
            epoch = self.locks.epoch
            grant = self.locks.acquire(attempt.age, rk, mode)
            if grant is Grant.WAIT:
                return (BLOCK, rk, epoch)
            if grant is Grant.DIE:
                self.attempts += 1
                return (DONE, Status.ABORTED, AbortReason.LOCK_CONFLICT)
            attempt.pc += 1
            done = self._execute(attempt, stmt)
            if done is not None:
                self.attempts += 1
                return done
            return (RUN, 1)
        self.attempts += 1
        self._install(attempt)
        return (DONE, Status.COMMITTED, AbortReason.NONE)

    def finish(self, attempt: Attempt) -> list[RowKey]:
        return self.locks.release_all(attempt.age)


def make_protocol(name: str, db: Database, concurrent: bool = False, deadlock: str = "wait-die") -> Protocol:
    name = name.lower()
    if name == "occ":
        return OCC(db, concurrent)
    if name == "2pl":
        return TwoPhaseLocking(db, concurrent, deadlock)
    raise ValueError(f"unknown protocol {name!r}")
