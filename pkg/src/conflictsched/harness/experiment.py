"""Two-phase experiment protocol, repetitions and continuous runs."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from ..engine.protocols import make_protocol
from ..engine.sim import Dispatch, Simulation
from ..engine.threaded import ThreadedEngine
from ..errors import ConfigurationError
from ..history import History
from ..scheduler import Mode, PolicyConfig, Scheduler, parse_policy
from ..state import StabilityGate, State
from ..statements import extract_references
from ..workloads import SkewSchedule, Workload, make_workload
from .config import ExperimentConfig
from .metrics import Metrics, mean, rse
from .throttle import make_throttle

log = logging.getLogger(__name__)

US = 1_000_000


def stream(config: ExperimentConfig, rep: int, phase: str, name: str) -> random.Random:
    """Independent seeded random stream for one purpose within one run."""
    return random.Random(f"{config.seed}/{rep}/{phase}/{name}")


@dataclass
class Sample:
    second: float
    commits: int
    aborts: int
    state_entries: int
    history_entries: int


@dataclass
class PhaseResult:
    metrics: Metrics
    history: History
    state: State | None
    engine_attempts: int
    max_idle_with_work_us: int
    queue_lengths: list[int]
    samples: list[Sample] = field(default_factory=list)
    evicted: int = 0
    capped: int = 0
    max_state_entries: int = 0
    gate_opened_at: float | None = None
    initial_values: dict | None = None
    final_values: dict | None = None
    policy: str = ""
    defaults: int = 0


def make_run_workload(config: ExperimentConfig, skewed: bool) -> Workload:
    return make_workload(config.benchmark, config.scale, config.warehouses, config.skew if skewed else SkewSchedule())


def _run(
    config: ExperimentConfig,
    rep: int,
    phase: str,
    policy: PolicyConfig,
    history: History,
    record_axes: PolicyConfig | None,
    duration_s: float,
    skewed: bool,
    continuous: bool = False,
    keep_commit_log: bool = False,
    workload: Workload | None = None,
) -> PhaseResult:
    """One timed run on a freshly populated database.

    ``record_axes`` names the (rep, gran) under which references are
    extracted for History writes; ``None`` leaves the History untouched.
    """
    workload = workload or make_run_workload(config, skewed)
    db = workload.make_database(stream(config, rep, phase, "populate"))
    initial = db.values() if keep_commit_log else None
    protocol = make_protocol(config.protocol, db, concurrent=config.driver == "threads", deadlock=config.deadlock)
    metrics = Metrics(duration_s=duration_s, commit_log=[] if keep_commit_log else None)
    state = State(config.threads)
    scheduler = Scheduler(policy, history, state, workload.domain_map, stream(config, rep, phase, "schedule"))
    generate = stream(config, rep, phase, "generate")
    dm = workload.domain_map
    intelligent = policy.mode is Mode.INTELLIGENT
    eviction = config.eviction_config if continuous and config.eviction_config.enabled else None
    result = PhaseResult(metrics, history, state if intelligent else None, 0, 0, [], policy=policy.label)
    queues = config.threads

    def produce(now_us: int) -> Dispatch:
        now = now_us / US
        txn = workload.next_transaction(generate, now)
        txn.arrival_time = now_us
        if record_axes is not None:
            txn.refs = extract_references(txn, record_axes.rep, record_axes.gran, dm)
        queue = scheduler.choose(txn, now)
        if eviction is not None and len(state) > eviction.cap:
            result.capped += state.enforce_cap(now, eviction.cap)
        if len(state) > result.max_state_entries:
            result.max_state_entries = len(state)
        cost = config.dispatch_cost_us + (len(txn.refs) * queues) // 20 if intelligent else config.dispatch_cost_us
        return Dispatch(txn, queue, cost)

    writable_history = history if history.writable else None
    throttle = make_throttle(config.throttle)

    if config.driver == "threads":
        if continuous:
            raise ConfigurationError("continuous mode needs the sim driver")
        engine = ThreadedEngine(protocol, config.threads, config.seed * 97 + rep, writable_history, metrics)
        engine.run(int(duration_s * US), produce, config.max_backlog, throttle)
        result.engine_attempts = protocol.attempts
        result.max_idle_with_work_us = engine.max_idle_with_work_us
        result.queue_lengths = engine.queues.lengths()
        result.defaults = scheduler.defaults
        if keep_commit_log:
            result.final_values = db.values()
        result.initial_values = initial
        return result

    sim = Simulation(
        protocol, config.threads, stream(config, rep, phase, "engine"), config.op_cost_us,
        history=writable_history, observer=metrics,
    )
    sim.start_workers()
    sim.spawn(sim.dispatcher(produce, config.max_backlog, throttle))

    if continuous:
        if eviction is not None:
            gate = StabilityGate(eviction.window, eviction.delta, eviction.gate)

            def housekeep(now_us: int) -> None:
                now = now_us / US
                if gate.observe(now, metrics.aborts, metrics.commits):
                    if result.gate_opened_at is None:
                        result.gate_opened_at = now
                    result.evicted += state.evict_stale(now, eviction.r_min, eviction.t_min, eviction.q_hot)

            sim.spawn(sim.periodic(int(eviction.interval * US), housekeep))

        next_regen = [config.regenerate_seconds]

        def sample(now_us: int) -> None:
            now = now_us / US
            if history.writable and config.regenerate_seconds > 0 and now >= next_regen[0] - 1e-9:
                history.regenerate()
                next_regen[0] += config.regenerate_seconds
            result.samples.append(Sample(now, metrics.commits, metrics.aborts, len(state), len(history)))

        sim.spawn(sim.periodic(US, sample))

    sim.run(int(duration_s * US))
    result.engine_attempts = protocol.attempts
    result.max_idle_with_work_us = sim.max_idle_with_work_us
    result.queue_lengths = sim.queues.lengths()
    result.defaults = scheduler.defaults
    result.initial_values = initial
    if keep_commit_log:
        result.final_values = db.values()
    return result


def run_phase1(config: ExperimentConfig, rep: int = 0) -> History:
    """Random assignment while the History learns under the policy's reference axes.

    Returns the History frozen read-only.
    """
    policy = config.policy_config
    history = History()
    random_policy = parse_policy("random", config.threads)
    if config.phase1_seconds > 0:
        _run(config, rep, "phase1", random_policy, history, policy, config.phase1_seconds, skewed=False)
    return history.freeze()


def run_phase2(config: ExperimentConfig, history: History, rep: int = 0, keep_commit_log: bool = False) -> PhaseResult:
    return _run(
        config, rep, "phase2", config.policy_config, history, None, config.phase2_seconds,
        skewed=True, keep_commit_log=keep_commit_log,
    )


def run_repetition(config: ExperimentConfig, rep: int = 0, keep_commit_log: bool = False) -> PhaseResult:
    history = run_phase1(config, rep) if config.intelligent else History().freeze()
    return run_phase2(config, history, rep, keep_commit_log)


def run_continuous(config: ExperimentConfig, rep: int = 0) -> PhaseResult:
    """One long run with History writes and regeneration, State eviction and the skew schedule."""
    policy = config.policy_config
    if config.intelligent:
        history = run_phase1(config, rep)
        history.writable = True
        axes: PolicyConfig | None = policy
    else:
        history, axes = History().freeze(), None
    return _run(config, rep, "continuous", policy, history, axes, config.duration_seconds, skewed=True,
                continuous=True)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    results: list[PhaseResult]

    @property
    def metrics(self) -> list[Metrics]:
        return [r.metrics for r in self.results]

    def mean(self, attr: str) -> float:
        return mean([getattr(m, attr) for m in self.metrics])

    def rse(self, attr: str) -> float:
        return rse([getattr(m, attr) for m in self.metrics])


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Repetitions of (Phase I, Phase II), or of continuous runs; writes CSV and figures if asked."""
    results = []
    for rep in range(config.repetitions):
        result = run_continuous(config, rep) if config.continuous else run_repetition(config, rep)
        m = result.metrics
        log.info("rep %d: tps=%.1f abort_rate=%.3f", rep, m.tps, m.abort_rate)
        results.append(result)
    report = ExperimentReport(config, results)
    if config.out:
        from .figures import write_figures
        from .report import write_csv

        write_csv(report, config.out)
        write_figures(report, config.out)
    return report
