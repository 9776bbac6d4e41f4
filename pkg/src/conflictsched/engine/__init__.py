"""Miniature main-memory transactional engine."""

from .locks import Grant, LockManager, LockMode
from .protocols import OCC, AbortReason, Attempt, Protocol, Status, TwoPhaseLocking, TxnOutcome, make_protocol
from .queues import RunQueues
from .sim import Dispatch, Simulation
from .storage import ABSENT, Database, Row, Schema, TableSchema

__all__ = [
    "ABSENT", "AbortReason", "Attempt", "Database", "Dispatch", "Grant", "LockManager", "LockMode", "OCC",
    "Protocol", "Row", "RunQueues", "Schema", "Simulation", "Status", "TableSchema", "TwoPhaseLocking",
    "TxnOutcome", "make_protocol",
]
