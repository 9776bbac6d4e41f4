"""Versioned main-memory row store."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from ..errors import ConfigurationError
from ..statements import DomainMap, Expr, Statement

Key = tuple
RowKey = tuple[str, Key]  # (table, primary key)

ABSENT = -1
"""Version reported for a key that has never held a row."""


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[str, ...]
    key: tuple[str, ...]

    def __post_init__(self):
        missing = set(self.key) - set(self.columns)
        if missing:
            raise ConfigurationError(f"{self.name}: key columns {sorted(missing)} not in table")


@dataclass
class Schema:
    tables: dict[str, TableSchema]
    domain_map: DomainMap | None = None

    @classmethod
    def of(cls, *tables: TableSchema, domain_map: DomainMap | None = None) -> "Schema":
        return cls({t.name: t for t in tables}, domain_map)

    def attributes(self) -> set[str]:
        return {c for t in self.tables.values() for c in t.columns}

    def table(self, name: str) -> TableSchema:
        try:
            return self.tables[name]
        except KeyError:
            raise ConfigurationError(f"unknown table {name!r}") from None

    def check(self, stmt: Statement) -> None:
        """Fail fast on statements that name unknown tables or attributes."""
        table = self.table(stmt.table)
        names = [a for a, _ in stmt.assignments + stmt.payload] + [a for a, _, _ in stmt.predicates]
        unknown = sorted(set(names) - set(table.columns))
        if unknown:
            raise ConfigurationError(f"{stmt.table}: unknown attributes {unknown}")


class Row:
    """A row: the (version, columns, deleted) triple is replaced as one unit.

    Swapping a single tuple keeps concurrent readers from observing a version
    that does not belong to the columns they read.
    """

    __slots__ = ("key", "image")

    def __init__(self, key: Key, columns: dict[str, Any], version: int = 0, deleted: bool = False):
        self.key = key
        self.image = (version, columns, deleted)

    @property
    def version(self) -> int:
        return self.image[0]

    @property
    def columns(self) -> dict[str, Any]:
        return self.image[1]

    @property
    def deleted(self) -> bool:
        return self.image[2]

    def __repr__(self) -> str:
        v, cols, dead = self.image
        return f"Row({self.key}, v{v}{', deleted' if dead else ''}, {cols})"


@dataclass
class Database:
    schema: Schema
    tables: dict[str, dict[Key, Row]] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.schema.tables:
            self.tables.setdefault(name, {})

    # --- loading -----------------------------------------------------------

    def load(self, table: str, rows: Iterable[Mapping[str, Any]]) -> None:
        spec = self.schema.table(table)
        store = self.tables[table]
        for values in rows:
            key = tuple(values[c] for c in spec.key)
            if key in store:
                raise ConfigurationError(f"{table}: duplicate key {key} while loading")
            store[key] = Row(key, dict(values))

    # --- access ------------------------------------------------------------

    def row(self, table: str, key: Key) -> Row | None:
        return self.tables[table].get(key)

    def read(self, table: str, key: Key) -> tuple[int, dict[str, Any] | None]:
        """(version, columns) of the committed image; columns None when absent."""
        row = self.tables[table].get(key)
        if row is None:
            return ABSENT, None
        version, cols, dead = row.image
        return version, (None if dead else cols)

    def version(self, table: str, key: Key) -> int:
        row = self.tables[table].get(key)
        return ABSENT if row is None else row.image[0]

    def install(self, table: str, key: Key, columns: dict[str, Any] | None) -> None:
        """Commit a write image; ``None`` deletes.  Bumps the version by one."""
        store = self.tables[table]
        row = store.get(key)
        if row is None:
            if columns is None:
                return
            store[key] = Row(key, columns, 0)
            return
        version = row.image[0]
        row.image = (version + 1, columns if columns is not None else {}, columns is None)

    # --- key resolution ------------------------------------------------------

    def point_key(self, stmt: Statement, ctx: Mapping[str, Any]) -> tuple[Key, list[tuple[str, Any]]]:
        """Primary key named by the WHERE clause, plus residual (non-key) filters."""
        spec = self.schema.table(stmt.table)
        where = {}
        for attr, _, value in stmt.predicates:
            where[attr] = value.evaluate(None, ctx) if isinstance(value, Expr) else value
        try:
            key = tuple(where[c] for c in spec.key)
        except KeyError:
            raise ConfigurationError(f"{stmt}: WHERE must bind the primary key {spec.key}") from None
        residual = [(a, v) for a, v in where.items() if a not in spec.key]
        return key, residual

    def insert_image(self, stmt: Statement, ctx: Mapping[str, Any]) -> tuple[Key, dict[str, Any]]:
        spec = self.schema.table(stmt.table)
        values = {}
        for attr, value in stmt.assignments + stmt.payload:
            values[attr] = value.evaluate(None, ctx) if isinstance(value, Expr) else value
        try:
            key = tuple(values[c] for c in spec.key)
        except KeyError:
            raise ConfigurationError(f"{stmt}: INSERT must supply the primary key {spec.key}") from None
        return key, values

    # --- inspection ------------------------------------------------------------

    def count(self, table: str) -> int:
        return sum(1 for r in self.tables[table].values() if not r.deleted)

    def values(self) -> dict[str, dict[Key, dict[str, Any]]]:
        """Plain copy of every live row, for oracles and comparisons."""
        return {
            name: {k: dict(r.columns) for k, r in sorted(store.items()) if not r.deleted}
            for name, store in self.tables.items()
        }
