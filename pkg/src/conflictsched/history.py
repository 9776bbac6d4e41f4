"""Aggregated per-reference abort/commit counters."""

from __future__ import annotations

import csv
import threading
from typing import IO, Iterable

from .statements import Reference

_STRIPES = 64


class HistoryEntry:
    __slots__ = ("abort_count", "commit_count")

    def __init__(self, abort_count: int = 0, commit_count: int = 0):
        self.abort_count = abort_count
        self.commit_count = commit_count

    def __iter__(self):
        yield self.abort_count
        yield self.commit_count

    def __repr__(self) -> str:
        return f"HistoryEntry({self.abort_count}, {self.commit_count})"


class History:
    """Concurrent map from reference to (abort_count, commit_count).

    Increments are atomic per entry (striped locks); readers take no lock and
    may observe counters from slightly different instants.  Counters only grow
    within a generation; :meth:`regenerate` starts a new, empty generation.

    ``writable`` is the mode flag: when False, ``record_*`` calls are ignored,
    which is how the measured phase uses the History as a read-only repository.
    """

    def __init__(self):
        self.entries: dict[Reference, HistoryEntry] = {}
        self.generation = 0
        self.writable = True
        self._locks = [threading.Lock() for _ in range(_STRIPES)]

    def _entry(self, ref: Reference) -> HistoryEntry:
        entry = self.entries.get(ref)
        if entry is None:
            with self._locks[hash(ref) % _STRIPES]:
                entry = self.entries.setdefault(ref, HistoryEntry())
        return entry

    def record_abort(self, refs: Iterable[Reference]) -> None:
        if not self.writable:
            return
        for ref in refs:
            entry = self._entry(ref)
            with self._locks[hash(ref) % _STRIPES]:
                entry.abort_count += 1

    def record_commit(self, refs: Iterable[Reference]) -> None:
        if not self.writable:
            return
        for ref in refs:
            entry = self._entry(ref)
            with self._locks[hash(ref) % _STRIPES]:
                entry.commit_count += 1

    def abort_count(self, ref: Reference) -> int:
        entry = self.entries.get(ref)
        return entry.abort_count if entry is not None else 0

    def commit_count(self, ref: Reference) -> int:
        entry = self.entries.get(ref)
        return entry.commit_count if entry is not None else 0

    def fraction(self, ref: Reference) -> float:
        """aborts / (aborts + commits); 0.0 for a reference never seen."""
        entry = self.entries.get(ref)
        if entry is None:
            return 0.0
        aborted, committed = entry.abort_count, entry.commit_count
        total = aborted + committed
        return aborted / total if total else 0.0

    def regenerate(self) -> None:
        self.entries = {}
        self.generation += 1

    def freeze(self) -> "History":
        self.writable = False
        return self

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, ref: object) -> bool:
        return ref in self.entries

    def snapshot(self) -> list[tuple[Reference, int, int]]:
        return sorted((ref, e.abort_count, e.commit_count) for ref, e in list(self.entries.items()))

    def to_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["reference", "abort_count", "commit_count"])
        writer.writerows(self.snapshot())

    @classmethod
    def from_counts(cls, counts: dict[Reference, tuple[int, int]]) -> "History":
        history = cls()
        for ref, (aborted, committed) in counts.items():
            history.entries[ref] = HistoryEntry(aborted, committed)
        return history
