"""SmallBank: five banking procedures over account/savings/checking."""

from __future__ import annotations

import random

from ..engine.storage import Database, Schema, TableSchema
from ..statements import DomainMap, Fn, Var, add, select, update
from .base import BenchmarkSpec, HotSpot, SkewSchedule, Workload, scaled

TABLE_SIZES = {"account": 10_000, "savings": 10_000, "checking": 10_000}

MIX = (
    ("Amalgamate", 4),
    ("Balance", 24),
    ("DepositChecking", 24),
    ("TransactSavings", 24),
    ("WriteCheck", 24),
)

HOT_SPOT = HotSpot(0.9, 1, 50)

SCHEMA_TABLES = (
    TableSchema("account", ("custid", "name"), ("custid",)),
    TableSchema("savings", ("custid", "bal"), ("custid",)),
    TableSchema("checking", ("custid", "bal"), ("custid",)),
)

# Procedures that move money; Balance only reads.
MONEY_TYPES = ("Amalgamate", "DepositChecking", "TransactSavings", "WriteCheck")


def make_schema() -> Schema:
    return Schema.of(*SCHEMA_TABLES, domain_map=DomainMap({"custid": "custid", "name": "name", "bal": "bal"}))


def _write_check(amount: int):
    def apply(row, ctx):
        penalty = 1 if ctx["sav"] + ctx["chk"] < amount else 0
        return row["bal"] - amount - penalty

    return Fn(apply, f"bal-{amount}-penalty")


class SmallBank(Workload):
    def __init__(self, scale: float = 1.0, skew: SkewSchedule | None = None, hot_spot: HotSpot | None = HOT_SPOT):
        sizes = {t: scaled(n, scale) for t, n in TABLE_SIZES.items()}
        spec = BenchmarkSpec("smallbank", sizes, MIX, "custid", hot_spot)
        super().__init__(spec, make_schema(), skew or SkewSchedule())
        self.accounts = sizes["account"]

    def partitions(self) -> int:
        return self.accounts

    def populate(self, db: Database, rng: random.Random) -> None:
        n = self.accounts
        db.load("account", ({"custid": c, "name": f"cust{c}"} for c in range(1, n + 1)))
        db.load("savings", ({"custid": c, "bal": rng.randint(10_000, 50_000)} for c in range(1, n + 1)))
        db.load("checking", ({"custid": c, "bal": rng.randint(10_000, 50_000)} for c in range(1, n + 1)))

    def build(self, txn_type: str, rng: random.Random, now: float):
        a = self.draw_partition(rng, now)
        if txn_type == "Amalgamate":
            b = a
            while b == a and self.accounts > 1:
                b = self.draw_partition(rng, now)
            return [
                select("account", [("custid", a)]),
                select("account", [("custid", b)]),
                select("savings", [("custid", a)], {"bal": "sav"}),
                select("checking", [("custid", a)], {"bal": "chk"}),
                update("savings", [("bal", 0)], [("custid", a)]),
                update("checking", [("bal", 0)], [("custid", a)]),
                update("checking", [("bal", add("bal", Var("sav"), Var("chk")))], [("custid", b)]),
            ], a
        if txn_type == "Balance":
            return [
                select("account", [("custid", a)]),
                select("savings", [("custid", a)], {"bal": "sav"}),
                select("checking", [("custid", a)], {"bal": "chk"}),
            ], a
        amount = rng.randint(1, 100)
        if txn_type == "DepositChecking":
            return [
                select("account", [("custid", a)]),
                update("checking", [("bal", add("bal", amount))], [("custid", a)]),
            ], a
        if txn_type == "TransactSavings":
            return [
                select("account", [("custid", a)]),
                update("savings", [("bal", add("bal", amount))], [("custid", a)]),
            ], a
        return [
            select("account", [("custid", a)]),
            select("savings", [("custid", a)], {"bal": "sav"}),
            select("checking", [("custid", a)], {"bal": "chk"}),
            update("checking", [("bal", _write_check(amount))], [("custid", a)]),
        ], a


def total_balance(db: Database | dict) -> int:
    """Sum of savings and checking balances of a database or a ``Database.values()`` snapshot."""
    values = db.values() if isinstance(db, Database) else db
    return sum(r["bal"] for r in values["savings"].values()) + sum(r["bal"] for r in values["checking"].values())
