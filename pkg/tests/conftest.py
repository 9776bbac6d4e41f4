from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conflictsched.history import History  # noqa: E402
from conflictsched.state import State  # noqa: E402
from conflictsched.statements import Transaction, update  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def stock_update(qty: int, item: int, warehouse: int):
    return update("stock", [("s_quantity", qty)], [("s_i_id", item), ("s_w_id", warehouse)])


def stock_txn(txn_id: int, qty: int, item: int, warehouse: int) -> Transaction:
    return Transaction(txn_id, "stock", (stock_update(qty, item, warehouse),))


LITERAL_HISTORY = {
    "s_quantity=6": (20, 60),
    "s_quantity=7": (40, 20),
    "s_i_id=1": (20, 20),
    "s_i_id=2": (0, 20),
    "s_w_id=5": (20, 20),
}

LITERAL_TXNS = [(7, 1, 5), (7, 1, 5), (6, 2, 5), (6, 2, 5)]
LITERAL_QUEUES = [0, 0, 1, 2]

CANON_HISTORY = {
    "i_id=2": (10, 10),
    "o_id=10": (10, 10),
    "c_id=11": (10, 10),
    "w_id=5": (30, 10),
    "s_quantity=7": (20, 20),
}

CANON_STATE = {
    "i_id=2": [1, 0, 0],
    "w_id=5": [1, 1, 1],
    "c_id=11": [0, 1, 1],
    "s_quantity=7": [1, 0, 0],
    "o_id=10": [0, 0, 1],
}


def literal_state() -> State:
    """Replay of the four listed transactions onto queues one, one, two, three."""
    from conflictsched.statements import Gran, Rep, extract_references

    state = State(3)
    for (qty, item, wh), q in zip(LITERAL_TXNS, LITERAL_QUEUES):
        refs = extract_references([stock_update(qty, item, wh)], Rep.LITERAL, Gran.SINGLE)
        state.on_enqueue(refs, q, 0.0)
    return state


def state_from_counts(counts: dict[str, list[int]], now: float = 0.0) -> State:
    state = State(len(next(iter(counts.values()))))
    for ref, per_queue in counts.items():
        for q, n in enumerate(per_queue):
            for _ in range(n):
                state.on_enqueue([ref], q, now)
    return state


@pytest.fixture
def literal_case():
    return History.from_counts(LITERAL_HISTORY), literal_state()


@pytest.fixture
def canon_case():
    return History.from_counts(CANON_HISTORY), state_from_counts(CANON_STATE)
