"""Structured statements, transactions and reference extraction.

A transaction is represented for scheduling purposes by the set of its
*references*: ``attr=value`` tokens taken from the SET/VALUES and WHERE
clauses of its statements.  Only bound input parameters (integer or string
literals) produce references; values computed at execution time (expressions
over rows already read) carry no scheduling evidence.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Union

from .errors import ConfigurationError

Reference = str
"""A normalized reference token, e.g. ``"w_id=5"`` or ``"s_i_id=2 AND s_w_id=5"``."""

AND = " AND "


class StmtKind(enum.Enum):
    SELECT = "SELECT"
    UPDATE = "UPDATE"
    INSERT = "INSERT"
    DELETE = "DELETE"


class Rep(enum.Enum):
    LITERAL = "literal"
    CANONICAL = "canonical"


class Gran(enum.Enum):
    SINGLE = "single"
    ALL = "all"


# --- execution-time values -------------------------------------------------


class Expr:
    """A value computed when the statement executes."""

    def evaluate(self, row: Mapping[str, Any] | None, ctx: Mapping[str, Any]) -> Any:
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class Var(Expr):
    """A value bound earlier in the same transaction attempt."""

    name: str

    def evaluate(self, row, ctx):
        return ctx[self.name]

    def __str__(self) -> str:
        return f"${self.name}"


@dataclass(frozen=True, slots=True)
class Add(Expr):
    """``column + term1 + term2 ...`` over the row being updated."""

    column: str
    terms: tuple[Union[int, Var], ...]

    def evaluate(self, row, ctx):
        total = row[self.column]
        for t in self.terms:
            total += ctx[t.name] if isinstance(t, Var) else t
        return total

    def __str__(self) -> str:
        return self.column + "".join(f"+{t}" for t in self.terms)


def add(column: str, *terms: Union[int, Var]) -> Add:
    return Add(column, tuple(terms))


@dataclass(frozen=True, slots=True)
class Fn(Expr):
    """Escape hatch for procedure logic, e.g. SmallBank's overdraft penalty."""

    fn: Callable[[Mapping[str, Any] | None, Mapping[str, Any]], Any] = field(compare=False)
    label: str = "fn"

    def evaluate(self, row, ctx):
        return self.fn(row, ctx)

    def __str__(self) -> str:
        return self.label


Value = Union[int, str, Expr]


def is_literal(value: Any) -> bool:
    return isinstance(value, (int, str)) and not isinstance(value, bool)


def render_value(value: int | str) -> str:
    return str(value)


# --- statements and transactions ---------------------------------------------


@dataclass(frozen=True, slots=True)
class Statement:
    """One point statement against a table.

    ``assignments`` are labeled SET/VALUES columns; ``payload`` holds written
    columns that are deliberately not labeled as references (row ids, line
    numbers, filler data).  ``binds`` maps selected columns to attempt-local
    variable names.
    """

    kind: StmtKind
    table: str
    assignments: tuple[tuple[str, Value], ...] = ()
    predicates: tuple[tuple[str, str, Value], ...] = ()
    payload: tuple[tuple[str, Value], ...] = ()
    binds: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.kind in (StmtKind.SELECT, StmtKind.DELETE) and (self.assignments or self.payload):
            raise ValueError(f"{self.kind.value} cannot carry assignments")
        if self.kind is StmtKind.INSERT and self.predicates:
            raise ValueError("INSERT cannot carry predicates")
        for _, op, _ in self.predicates:
            if op != "=":
                raise ValueError(f"only equality predicates are supported, got {op!r}")

    @property
    def is_write(self) -> bool:
        return self.kind is not StmtKind.SELECT

    def where(self) -> dict[str, Value]:
        return {attr: value for attr, _, value in self.predicates}

    def __str__(self) -> str:
        sets = ", ".join(f"{a}={v}" for a, v in self.assignments + self.payload)
        conds = AND.join(f"{a}{op}{v}" for a, op, v in self.predicates)
        if self.kind is StmtKind.SELECT:
            return f"SELECT * FROM {self.table}" + (f" WHERE {conds}" if conds else "")
        if self.kind is StmtKind.DELETE:
            return f"DELETE FROM {self.table}" + (f" WHERE {conds}" if conds else "")
        if self.kind is StmtKind.INSERT:
            return f"INSERT INTO {self.table} VALUES ({sets})"
        return f"UPDATE {self.table} SET {sets}" + (f" WHERE {conds}" if conds else "")


def select(table: str, where: Iterable[tuple[str, Value]] = (), binds: Mapping[str, str] | None = None) -> Statement:
    return Statement(
        StmtKind.SELECT,
        table,
        predicates=tuple((a, "=", v) for a, v in where),
        binds=tuple((binds or {}).items()),
    )


def update(table: str, sets: Iterable[tuple[str, Value]], where: Iterable[tuple[str, Value]]) -> Statement:
    return Statement(
        StmtKind.UPDATE,
        table,
        assignments=tuple(sets),
        predicates=tuple((a, "=", v) for a, v in where),
    )


def insert(
    table: str, values: Iterable[tuple[str, Value]], payload: Iterable[tuple[str, Value]] = ()
) -> Statement:
    return Statement(StmtKind.INSERT, table, assignments=tuple(values), payload=tuple(payload))


def delete(table: str, where: Iterable[tuple[str, Value]]) -> Statement:
    return Statement(StmtKind.DELETE, table, predicates=tuple((a, "=", v) for a, v in where))


@dataclass(slots=True)
class Transaction:
    txn_id: int
    txn_type: str
    statements: tuple[Statement, ...]
    partition_key: int | None = None
    arrival_time: int = 0
    retry_count: int = 0
    refs: frozenset[Reference] = frozenset()

    def __post_init__(self):
        if not self.statements:
            raise ValueError("a transaction needs at least one statement")


# --- domains and extraction --------------------------------------------------


@dataclass(frozen=True)
class DomainMap:
    """Attribute -> canonical domain attribute.

    Attributes without a foreign-key domain map to themselves and must still
    be listed: the map is total over the schema it describes.
    """

    mapping: Mapping[str, str]

    def canonical(self, attr: str) -> str:
        try:
            return self.mapping[attr]
        except KeyError:
            raise ConfigurationError(f"attribute {attr!r} has no canonical domain") from None

    def check_total(self, attributes: Iterable[str]) -> None:
        missing = sorted(set(attributes) - set(self.mapping))
        if missing:
            raise ConfigurationError(f"domain map is missing attributes: {', '.join(missing)}")

    @classmethod
    def from_domains(cls, domains: Mapping[str, Iterable[str]], identity: Iterable[str] = ()) -> "DomainMap":
        mapping = {a: a for a in identity}
        for domain, aliases in domains.items():
            mapping[domain] = domain
            for alias in aliases:
                mapping[alias] = domain
        return cls(mapping)


def _token(attr: str, value: int | str) -> Reference:
    return sys.intern(f"{attr}={render_value(value)}")


def statement_references(stmt: Statement, rep: Rep, gran: Gran, dm: DomainMap | None) -> list[Reference]:
    if rep is Rep.CANONICAL and dm is None:
        raise ConfigurationError("canonical references need a domain map")
    name = dm.canonical if rep is Rep.CANONICAL else (lambda a: a)
    out = [_token(name(a), v) for a, v in stmt.assignments if is_literal(v)]
    preds = [(name(a), v) for a, _, v in stmt.predicates if is_literal(v)]
    if gran is Gran.SINGLE:
        out.extend(_token(a, v) for a, v in preds)
    elif preds:
        out.append(sys.intern(AND.join(f"{a}={render_value(v)}" for a, v in preds)))
    return out


def extract_references(
    txn: Transaction | Iterable[Statement], rep: Rep, gran: Gran, dm: DomainMap | None = None
) -> frozenset[Reference]:
    """The reference set of a transaction under one (rep, gran) choice."""
    statements = txn.statements if isinstance(txn, Transaction) else txn
    refs: set[Reference] = set()
    for stmt in statements:
        refs.update(statement_references(stmt, rep, gran, dm))
    return frozenset(refs)
