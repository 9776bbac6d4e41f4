"""Small key-value workloads for oracles and fixtures."""

from __future__ import annotations

import random

from ..engine.storage import Database, Schema, TableSchema
from ..statements import DomainMap, Statement, Var, add, delete, insert, select, update
from .base import BenchmarkSpec, SkewSchedule, Workload

SCHEMA = Schema.of(TableSchema("kv", ("k", "v"), ("k",)), domain_map=DomainMap({"k": "k", "v": "v"}))


def random_statements(rng: random.Random, keys: list[int], ops: int, tag: int = 0) -> list[Statement]:
    """A random mix of reads, blind writes, increments, copies, inserts and deletes.

    Inserts and deletes use the two keys above ``max(keys)``, so they may
    collide with each other while the base keys always exist.
    """
    stmts: list[Statement] = []
    fresh = max(keys) + 1
    for n in range(ops):
        k = rng.choice(keys)
        op = rng.random()
        var = f"x{n}"
        if op < 0.25:
            stmts.append(select("kv", [("k", k)], {"v": var}))
        elif op < 0.45:
            stmts.append(update("kv", [("v", rng.randint(0, 9))], [("k", k)]))
        elif op < 0.7:
            stmts.append(update("kv", [("v", add("v", rng.randint(1, 5)))], [("k", k)]))
        elif op < 0.85:
            src = rng.choice(keys)
            stmts.append(select("kv", [("k", src)], {"v": var}))
            stmts.append(update("kv", [("v", add("v", Var(var)))], [("k", k)]))
        elif op < 0.93:
            stmts.append(insert("kv", [("k", fresh + rng.randint(0, 1))], payload=[("v", tag)]))
        else:
            stmts.append(delete("kv", [("k", fresh + rng.randint(0, 1))]))
    return stmts


class Partitioned(Workload):
    """Transactions that touch one partition each: conflicts exist only inside partitions.

    Keys ``p, p + P, p + 2P, ...`` belong to partition ``p``.
    """

    def __init__(self, partitions: int = 4, keys_per_partition: int = 4, ops: int = 4,
                 skew: SkewSchedule | None = None):
        self.partition_count = partitions
        self.keys_per_partition = keys_per_partition
        self.ops = ops
        spec = BenchmarkSpec("partitioned", {"kv": partitions * keys_per_partition}, (("rmw", 100),), "k")
        super().__init__(spec, SCHEMA, skew or SkewSchedule())

    def partitions(self) -> int:
        return self.partition_count

    def populate(self, db: Database, rng: random.Random) -> None:
        db.load("kv", ({"k": k, "v": 0} for k in range(self.partition_count * self.keys_per_partition)))

    def build(self, txn_type: str, rng: random.Random, now: float):
        p = self.draw_partition(rng, now) - 1
        keys = [p + i * self.partition_count for i in range(self.keys_per_partition)]
        stmts = []
        for _ in range(self.ops):
            k = rng.choice(keys)
            stmts.append(select("kv", [("k", k)], {"v": "v"}))
            stmts.append(update("kv", [("v", add("v", 1))], [("k", k)]))
        return stmts, p
