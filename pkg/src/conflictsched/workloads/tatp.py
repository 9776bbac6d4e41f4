"""TATP: seven telecom procedures keyed by subscriber id."""

from __future__ import annotations

import random

from ..engine.storage import Database, Schema, TableSchema
from ..statements import DomainMap, delete, insert, select, update
from .base import BenchmarkSpec, HotSpot, SkewSchedule, Workload, scaled

TABLE_SIZES = {
    "subscriber": 10_000,
    "access_info": 24_986,
    "special_facility": 24_931,
    "call_forwarding": 37_333,
}

MIX = (
    ("GetAccessData", 3),
    ("GetNewDestination", 3),
    ("GetSubscriberData", 40),
    ("InsertCallForwarding", 2),
    ("DeleteCallForwarding", 2),
    ("UpdateSubscriberData", 10),
    ("UpdateLocation", 40),
)

HOT_SPOT = HotSpot(0.9, 1, 20)

TYPES = (1, 2, 3, 4)
START_TIMES = (0, 8, 16)

SCHEMA_TABLES = (
    TableSchema("subscriber", ("s_id", "sub_nbr", "bit_1", "msc_location", "vlr_location"), ("s_id",)),
    TableSchema("access_info", ("s_id", "ai_type", "data1", "data2"), ("s_id", "ai_type")),
    TableSchema("special_facility", ("s_id", "sf_type", "is_active", "data_a"), ("s_id", "sf_type")),
    TableSchema(
        "call_forwarding",
        ("s_id", "sf_type", "start_time", "end_time", "numberx"),
        ("s_id", "sf_type", "start_time"),
    ),
)


def make_schema() -> Schema:
    columns = {c for t in SCHEMA_TABLES for c in t.columns}
    return Schema.of(*SCHEMA_TABLES, domain_map=DomainMap({c: c for c in columns}))


def _sample_rows(rng: random.Random, required: list[tuple], optional: list[tuple], total: int) -> list[tuple]:
    """Exactly ``total`` keys: all of ``required`` first, then a random subset of ``optional``."""
    if total <= len(required):
        return sorted(rng.sample(required, total))
    extra = min(total - len(required), len(optional))
    return sorted(required + rng.sample(optional, extra))


class Tatp(Workload):
    def __init__(self, scale: float = 1.0, skew: SkewSchedule | None = None, hot_spot: HotSpot | None = HOT_SPOT):
        sizes = {t: scaled(n, scale) for t, n in TABLE_SIZES.items()}
        spec = BenchmarkSpec("tatp", sizes, MIX, "s_id", hot_spot)
        super().__init__(spec, make_schema(), skew or SkewSchedule())
        self.subscribers = sizes["subscriber"]

    def partitions(self) -> int:
        return self.subscribers

    def populate(self, db: Database, rng: random.Random) -> None:
        n, sizes = self.subscribers, self.spec.table_sizes
        subs = range(1, n + 1)
        db.load("subscriber", (
            {"s_id": s, "sub_nbr": f"{s:015d}", "bit_1": rng.randint(0, 1),
             "msc_location": rng.randint(1, 2**31), "vlr_location": rng.randint(1, 2**31)} for s in subs
        ))
        keys = _sample_rows(rng, [(s, 1) for s in subs], [(s, t) for s in subs for t in TYPES[1:]],
                            sizes["access_info"])
        db.load("access_info", (
            {"s_id": s, "ai_type": t, "data1": rng.randint(0, 255), "data2": rng.randint(0, 255)} for s, t in keys
        ))
        facilities = _sample_rows(rng, [(s, 1) for s in subs], [(s, t) for s in subs for t in TYPES[1:]],
                                  sizes["special_facility"])
        db.load("special_facility", (
            {"s_id": s, "sf_type": t, "is_active": int(rng.random() < 0.85), "data_a": rng.randint(0, 255)}
            for s, t in facilities
        ))
        slots = [(s, t, st) for s, t in facilities for st in START_TIMES]
        forwards = _sample_rows(rng, [], slots, sizes["call_forwarding"])
        db.load("call_forwarding", (
            {"s_id": s, "sf_type": t, "start_time": st, "end_time": st + rng.randint(1, 8),
             "numberx": f"{rng.randint(1, n):015d}"} for s, t, st in forwards
        ))

    def build(self, txn_type: str, rng: random.Random, now: float):
        s = self.draw_partition(rng, now)
        if txn_type == "GetSubscriberData":
            return [select("subscriber", [("s_id", s)], {"bit_1": "bit_1"})], s
        if txn_type == "GetAccessData":
            return [select("access_info", [("s_id", s), ("ai_type", rng.choice(TYPES))], {"data1": "data1"})], s
        if txn_type == "GetNewDestination":
            sf = rng.choice(TYPES)
            start = rng.choice(START_TIMES)
            return [
                select("special_facility", [("s_id", s), ("sf_type", sf)], {"is_active": "active"}),
                select("call_forwarding", [("s_id", s), ("sf_type", sf), ("start_time", start)],
                       {"numberx": "numberx"}),
            ], s
        if txn_type == "UpdateSubscriberData":
            sf = rng.choice(TYPES)
            return [
                update("subscriber", [("bit_1", rng.randint(0, 1))], [("s_id", s)]),
                update("special_facility", [("data_a", rng.randint(0, 255))], [("s_id", s), ("sf_type", sf)]),
            ], s
        if txn_type == "UpdateLocation":
            return [update("subscriber", [("vlr_location", rng.randint(1, 2**31))], [("s_id", s)])], s
        sf = rng.choice(TYPES)
        start = rng.choice(START_TIMES)
        if txn_type == "InsertCallForwarding":
            return [
                select("subscriber", [("s_id", s)], {"sub_nbr": "sub_nbr"}),
                select("special_facility", [("s_id", s), ("sf_type", sf)], {"is_active": "active"}),
                insert("call_forwarding", [("s_id", s), ("sf_type", sf), ("start_time", start),
                                           ("end_time", start + rng.randint(1, 8))],
                       payload=[("numberx", f"{rng.randint(1, self.subscribers):015d}")]),
            ], s
        return [
            select("subscriber", [("s_id", s)], {"sub_nbr": "sub_nbr"}),
            delete("call_forwarding", [("s_id", s), ("sf_type", sf), ("start_time", start)]),
        ], s
