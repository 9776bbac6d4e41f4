"""Conflict-predictive transaction scheduling over an in-memory OLTP engine."""

from .errors import ConfigurationError
from .history import History
from .scheduler import PolicyConfig, Scheduler, parse_policy, score_queues
from .state import EvictionConfig, State
from .statements import DomainMap, Gran, Rep, Statement, Transaction, extract_references

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DomainMap", "EvictionConfig", "Gran", "History", "PolicyConfig", "Rep", "Scheduler",
    "State", "Statement", "Transaction", "extract_references", "parse_policy", "score_queues",
]
