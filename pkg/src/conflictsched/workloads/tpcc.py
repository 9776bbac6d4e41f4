"""TPC-C reduced to NewOrder and Payment."""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..engine.storage import Database, Schema, TableSchema
from ..statements import DomainMap, Var, add, insert, select, update
from .base import BenchmarkSpec, SkewSchedule, Workload, scaled

TABLE_SIZES = {
    "warehouse": 11,
    "district": 110,
    "item": 10_000,
    "customer": 33_000,
    "history": 33_000,
    "stock": 110_000,
    "orders": 33_000,
    "new_order": 33_000,
    "order_line": 330_030,
}

MIX = (("NewOrder", 50), ("Payment", 50))

DISTRICTS_PER_WAREHOUSE = 10
LINES_PER_ORDER = 10

SCHEMA_TABLES = (
    TableSchema("warehouse", ("w_id", "w_name", "w_tax", "w_ytd"), ("w_id",)),
    TableSchema("district", ("d_w_id", "d_id", "d_name", "d_tax", "d_ytd", "d_next_o_id"), ("d_w_id", "d_id")),
    TableSchema(
        "customer",
        ("c_w_id", "c_d_id", "c_id", "c_last", "c_discount", "c_balance", "c_ytd_payment", "c_payment_cnt"),
        ("c_w_id", "c_d_id", "c_id"),
    ),
    TableSchema("history", ("h_id", "h_c_id", "h_c_d_id", "h_c_w_id", "h_d_id", "h_w_id", "h_amount"), ("h_id",)),
    TableSchema("item", ("i_id", "i_name", "i_price"), ("i_id",)),
    TableSchema("stock", ("s_w_id", "s_i_id", "s_quantity", "s_ytd", "s_order_cnt"), ("s_w_id", "s_i_id")),
    TableSchema("orders", ("o_w_id", "o_d_id", "o_id", "o_c_id", "o_ol_cnt"), ("o_w_id", "o_d_id", "o_id")),
    TableSchema("new_order", ("no_w_id", "no_d_id", "no_o_id"), ("no_w_id", "no_d_id", "no_o_id")),
    TableSchema(
        "order_line",
        ("ol_w_id", "ol_d_id", "ol_o_id", "ol_number", "ol_i_id", "ol_supply_w_id", "ol_quantity", "ol_amount"),
        ("ol_w_id", "ol_d_id", "ol_o_id", "ol_number"),
    ),
)

DOMAINS = {
    "w_id": ("d_w_id", "c_w_id", "o_w_id", "no_w_id", "ol_w_id", "ol_supply_w_id", "s_w_id", "h_w_id", "h_c_w_id"),
    "d_id": ("c_d_id", "o_d_id", "no_d_id", "ol_d_id", "h_d_id", "h_c_d_id"),
    "c_id": ("o_c_id", "h_c_id"),
    "i_id": ("s_i_id", "ol_i_id"),
    "o_id": ("no_o_id", "ol_o_id"),
}


def make_schema() -> Schema:
    columns = {c for t in SCHEMA_TABLES for c in t.columns}
    aliases = {a for group in DOMAINS.values() for a in group} | set(DOMAINS)
    dm = DomainMap.from_domains(DOMAINS, identity=columns - aliases)
    dm.check_total(columns)
    return Schema.of(*SCHEMA_TABLES, domain_map=dm)


@dataclass
class TpccSizes:
    warehouses: int
    items: int
    customers_per_district: int

    @classmethod
    def for_scale(cls, scale: float, warehouses: int | None = None) -> "TpccSizes":
        w = warehouses if warehouses is not None else scaled(TABLE_SIZES["warehouse"], scale)
        per_district = TABLE_SIZES["customer"] // TABLE_SIZES["district"]
        return cls(w, scaled(TABLE_SIZES["item"], scale), scaled(per_district, scale))

    def table_sizes(self) -> dict[str, int]:
        districts = self.warehouses * DISTRICTS_PER_WAREHOUSE
        customers = districts * self.customers_per_district
        return {
            "warehouse": self.warehouses,
            "district": districts,
            "item": self.items,
            "customer": customers,
            "history": customers,
            "stock": self.warehouses * self.items,
            "orders": customers,
            "new_order": customers,
            "order_line": customers * LINES_PER_ORDER,
        }


class Tpcc(Workload):
    def __init__(
        self,
        scale: float = 1.0,
        warehouses: int | None = None,
        skew: SkewSchedule | None = None,
        remote_stock: float = 0.01,
        remote_payment: float = 0.15,
    ):
        self.sizes = TpccSizes.for_scale(scale, warehouses)
        spec = BenchmarkSpec("tpcc", self.sizes.table_sizes(), MIX, "w_id")
        super().__init__(spec, make_schema(), skew or SkewSchedule())
        self.remote_stock = remote_stock
        self.remote_payment = remote_payment
        self.next_history_id = self.sizes.table_sizes()["history"] + 1

    def partitions(self) -> int:
        return self.sizes.warehouses

    def populate(self, db: Database, rng: random.Random) -> None:
        s = self.sizes
        W, cpd = s.warehouses, s.customers_per_district
        db.load("warehouse", (
            {"w_id": w, "w_name": f"W{w}", "w_tax": rng.randint(0, 2000), "w_ytd": 300_000} for w in range(1, W + 1)
        ))
        db.load("item", (
            {"i_id": i, "i_name": f"I{i}", "i_price": rng.randint(100, 10_000)} for i in range(1, s.items + 1)
        ))
        db.load("stock", (
            {"s_w_id": w, "s_i_id": i, "s_quantity": rng.randint(10, 100), "s_ytd": 0, "s_order_cnt": 0}
            for w in range(1, W + 1) for i in range(1, s.items + 1)
        ))
        districts, customers, history, orders, new_orders, lines = [], [], [], [], [], []
        h_id = 1
        for w in range(1, W + 1):
            for d in range(1, DISTRICTS_PER_WAREHOUSE + 1):
                districts.append({"d_w_id": w, "d_id": d, "d_name": f"D{w}.{d}", "d_tax": rng.randint(0, 2000),
                                  "d_ytd": 30_000, "d_next_o_id": cpd + 1})
                for c in range(1, cpd + 1):
                    customers.append({"c_w_id": w, "c_d_id": d, "c_id": c, "c_last": f"C{c % 1000}",
                                      "c_discount": rng.randint(0, 5000), "c_balance": -10,
                                      "c_ytd_payment": 10, "c_payment_cnt": 1})
                    history.append({"h_id": h_id, "h_c_id": c, "h_c_d_id": d, "h_c_w_id": w, "h_d_id": d,
                                    "h_w_id": w, "h_amount": 10})
                    h_id += 1
                    # order o_id = c placed by customer c
                    orders.append({"o_w_id": w, "o_d_id": d, "o_id": c, "o_c_id": c, "o_ol_cnt": LINES_PER_ORDER})
                    new_orders.append({"no_w_id": w, "no_d_id": d, "no_o_id": c})
                    for n in range(1, LINES_PER_ORDER + 1):
                        lines.append({"ol_w_id": w, "ol_d_id": d, "ol_o_id": c, "ol_number": n,
                                      "ol_i_id": rng.randint(1, s.items), "ol_supply_w_id": w,
                                      "ol_quantity": 5, "ol_amount": 0})
        for table, rows in (("district", districts), ("customer", customers), ("history", history),
                            ("orders", orders), ("new_order", new_orders), ("order_line", lines)):
            db.load(table, rows)

    def _other_warehouse(self, rng: random.Random, w: int) -> int:
        W = self.sizes.warehouses
        if W == 1:
            return w
        other = rng.randint(1, W - 1)
        return other + 1 if other >= w else other

    def build(self, txn_type: str, rng: random.Random, now: float):
        w = self.draw_partition(rng, now)
        if txn_type == "NewOrder":
            return self.new_order(rng, w), w
        return self.payment(rng, w), w

    def new_order(self, rng: random.Random, w: int) -> list:
        s = self.sizes
        d = rng.randint(1, DISTRICTS_PER_WAREHOUSE)
        c = rng.randint(1, s.customers_per_district)
        line_count = rng.randint(5, 15)
        items = rng.sample(range(1, s.items + 1), min(line_count, s.items))
        o_id = Var("o_id")
        stmts = [
            select("warehouse", [("w_id", w)], {"w_tax": "w_tax"}),
            select("district", [("d_w_id", w), ("d_id", d)], {"d_next_o_id": "o_id", "d_tax": "d_tax"}),
            update("district", [("d_next_o_id", add("d_next_o_id", 1))], [("d_w_id", w), ("d_id", d)]),
            select("customer", [("c_w_id", w), ("c_d_id", d), ("c_id", c)], {"c_discount": "c_discount"}),
            insert("orders", [("o_w_id", w), ("o_d_id", d), ("o_c_id", c)],
                   payload=[("o_id", o_id), ("o_ol_cnt", len(items))]),
            insert("new_order", [("no_w_id", w), ("no_d_id", d)], payload=[("no_o_id", o_id)]),
        ]
        for number, i in enumerate(items, start=1):
            supply = self._other_warehouse(rng, w) if rng.random() < self.remote_stock else w
            quantity = rng.randint(1, 10)
            stmts += [
                select("item", [("i_id", i)], {"i_price": "i_price"}),
                select("stock", [("s_i_id", i), ("s_w_id", supply)], {"s_quantity": "s_quantity"}),
                update("stock", [("s_quantity", rng.randint(10, 100))], [("s_i_id", i), ("s_w_id", supply)]),
                insert(
                    "order_line",
                    [("ol_w_id", w), ("ol_d_id", d), ("ol_i_id", i), ("ol_supply_w_id", supply)],
                    payload=[("ol_o_id", o_id), ("ol_number", number), ("ol_quantity", quantity),
                             ("ol_amount", 0)],
                ),
            ]
        return stmts

    def payment(self, rng: random.Random, w: int) -> list:
        s = self.sizes
        d = rng.randint(1, DISTRICTS_PER_WAREHOUSE)
        if rng.random() < self.remote_payment:
            c_w, c_d = self._other_warehouse(rng, w), rng.randint(1, DISTRICTS_PER_WAREHOUSE)
        else:
            c_w, c_d = w, d
        c = rng.randint(1, s.customers_per_district)
        amount = rng.randint(1, 5000)
        h_id = self.next_history_id
        self.next_history_id += 1
        cust = [("c_w_id", c_w), ("c_d_id", c_d), ("c_id", c)]
        return [
            select("warehouse", [("w_id", w)], {"w_name": "w_name"}),
            update("warehouse", [("w_ytd", add("w_ytd", amount))], [("w_id", w)]),
            select("district", [("d_w_id", w), ("d_id", d)], {"d_name": "d_name"}),
            update("district", [("d_ytd", add("d_ytd", amount))], [("d_w_id", w), ("d_id", d)]),
            select("customer", cust, {"c_balance": "c_balance"}),
            update("customer", [("c_balance", add("c_balance", -amount)),
                                ("c_ytd_payment", add("c_ytd_payment", amount)),
                                ("c_payment_cnt", add("c_payment_cnt", 1))], cust),
            insert("history", [("h_c_id", c), ("h_c_d_id", c_d), ("h_c_w_id", c_w), ("h_d_id", d),
                               ("h_w_id", w), ("h_amount", amount)], payload=[("h_id", h_id)]),
        ]

