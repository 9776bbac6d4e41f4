"""Queue selection: conflict-likelihood scoring plus Random / Hard Partition baselines."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigurationError
from .history import History
from .state import State
from .statements import DomainMap, Gran, Reference, Rep, Transaction, extract_references


class Mode(enum.Enum):
    INTELLIGENT = "intelligent"
    RANDOM = "random"
    HARD_PARTITION = "hard"


class Weight(enum.Enum):
    COUNT = "count"
    FRACTION = "fraction"


class Combine(enum.Enum):
    SUM = "sum"
    MAX = "max"


@dataclass(frozen=True)
class PolicyConfig:
    mode: Mode = Mode.INTELLIGENT
    weight: Weight = Weight.COUNT
    combine: Combine = Combine.MAX
    rep: Rep = Rep.CANONICAL
    gran: Gran = Gran.SINGLE
    queue_count: int = 1

    def __post_init__(self):
        if self.queue_count < 1:
            raise ConfigurationError("queue_count must be positive")

    @property
    def label(self) -> str:
        if self.mode is Mode.RANDOM:
            return "random"
        if self.mode is Mode.HARD_PARTITION:
            return "hard"
        return "/".join(x.value for x in (self.weight, self.combine, self.rep, self.gran))

    def with_queues(self, queue_count: int) -> "PolicyConfig":
        return PolicyConfig(self.mode, self.weight, self.combine, self.rep, self.gran, queue_count)


def parse_policy(text: str, queue_count: int = 1) -> PolicyConfig:
    """Parse ``random``, ``hard`` or ``count|fraction/sum|max/literal|canonical/single|all``."""
    text = text.strip().lower()
    if text == "random":
        return PolicyConfig(Mode.RANDOM, queue_count=queue_count)
    if text in ("hard", "hardpartition", "hard-partition"):
        return PolicyConfig(Mode.HARD_PARTITION, queue_count=queue_count)
    parts = text.split("/")
    if len(parts) != 4:
        raise ConfigurationError(f"cannot parse policy {text!r}")
    try:
        return PolicyConfig(
            Mode.INTELLIGENT, Weight(parts[0]), Combine(parts[1]), Rep(parts[2]), Gran(parts[3]), queue_count
        )
    except ValueError:
        raise ConfigurationError(f"cannot parse policy {text!r}") from None


ALL_POLICIES = tuple(
    f"{w.value}/{c.value}/{r.value}/{g.value}" for w in Weight for c in Combine for r in Rep for g in Gran
)


@dataclass
class QueueScores:
    scores: list[float]
    chosen: int
    used_default: bool


def weigh(ref: Reference, history: History, weight: Weight) -> float:
    if weight is Weight.COUNT:
        return history.abort_count(ref)
    return history.fraction(ref)


def select_refs(
    refs: Iterable[Reference],
    history: History,
    weight: Weight,
    combine: Combine,
    state: State | None = None,
) -> list[tuple[Reference, float]]:
    """Weighted references that take part in scoring.

    Max keeps the single heaviest reference.  Equal weights are broken by the
    larger State total (more queue evidence), then by the smaller token.
    """
    weighted = [(ref, weigh(ref, history, weight)) for ref in sorted(refs)]
    if combine is Combine.SUM or not weighted:
        return weighted

    def evidence(ref: Reference) -> int:
        entry = state.get(ref) if state is not None else None
        return entry.total if entry is not None else 0

    best = weighted[0]
    for item in weighted[1:]:
        if item[1] > best[1] or (item[1] == best[1] and evidence(item[0]) > evidence(best[0])):
            best = item
    return [best]


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def score_queues(refs: Iterable[Reference], history: History, state: State, config: PolicyConfig) -> QueueScores:
    queues = state.queue_count
    scores = [0.0] * queues
    selected = select_refs(refs, history, config.weight, config.combine, state)
    for ref, w in selected:
        if not w:
            continue
        entry = state.get(ref)
        if entry is None:
            continue
        counts = entry.queue_counts
        for q in range(queues):
            if counts[q]:
                scores[q] += w * counts[q]
    top = max(scores)
    if top == 0 or all(_same(s, scores[0]) for s in scores):
        return QueueScores(scores, state.least_loaded_queue(), True)
    tied = [q for q in range(queues) if _same(scores[q], top)]
    chosen = tied[0] if len(tied) == 1 else state.least_loaded_queue(tied)
    return QueueScores(scores, chosen, False)


class Scheduler:
    """The dispatch-side decision: extract references, score, enqueue-bookkeep."""

    def __init__(
        self,
        config: PolicyConfig,
        history: History,
        state: State,
        domain_map: DomainMap | None = None,
        rng: random.Random | None = None,
    ):
        if config.queue_count != state.queue_count:
            raise ConfigurationError("policy and State disagree on the number of queues")
        self.config = config
        self.history = history
        self.state = state
        self.domain_map = domain_map
        self.rng = rng or random.Random(0)
        self.defaults = 0

    def references(self, txn: Transaction) -> frozenset[Reference]:
        return extract_references(txn, self.config.rep, self.config.gran, self.domain_map)

    def choose(self, txn: Transaction, now: float = 0.0) -> int:
        cfg = self.config
        if cfg.mode is Mode.RANDOM:
            return self.rng.randrange(cfg.queue_count)
        if cfg.mode is Mode.HARD_PARTITION:
            if txn.partition_key is None:
                raise ConfigurationError(f"transaction {txn.txn_id} has no partition key")
            return txn.partition_key % cfg.queue_count
        if not txn.refs:
            txn.refs = self.references(txn)
        result = score_queues(txn.refs, self.history, self.state, cfg)
        self.defaults += result.used_default
        self.state.on_enqueue(txn.refs, result.chosen, now)
        return result.chosen


def choose_queue(
    txn: Transaction,
    history: History,
    state: State,
    config: PolicyConfig,
    rng: random.Random,
    domain_map: DomainMap | None = None,
    now: float = 0.0,
) -> int:
    return Scheduler(config, history, state, domain_map, rng).choose(txn, now)
