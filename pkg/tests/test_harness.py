from __future__ import annotations

import csv
import heapq
import io

import pytest

from conflictsched.engine.protocols import AbortReason, Status
from conflictsched.errors import ConfigurationError
from conflictsched.harness.config import ExperimentConfig, ThrottleConfig
from conflictsched.harness.experiment import _run, run_continuous, run_experiment, run_phase1, run_repetition
from conflictsched.harness.metrics import Metrics, mean, rse
from conflictsched.harness.report import COLUMNS, rows, write_rows
from conflictsched.harness.throttle import FixedRate, ResponseTimeController, make_throttle
from conflictsched.history import History
from conflictsched.scheduler import parse_policy
from conflictsched.statements import Transaction, select
from conflictsched.workloads import Partitioned, SkewSchedule

SMALL = ExperimentConfig(benchmark="smallbank", scale=0.01, phase1_seconds=0.5, phase2_seconds=1.0)


def _txn(arrival=0):
    t = Transaction(1, "x", (select("kv", [("k", 0)]),))
    t.arrival_time = arrival
    return t


# --- metrics ------------------------------------------------------------------------


def test_abort_rate_counts_attempts():
    m = Metrics(duration_s=1.0)
    for _ in range(30):
        m.on_attempt(_txn(), Status.ABORTED, AbortReason.WRITE_CONFLICT, 10, 0)
    for _ in range(70):
        m.on_attempt(_txn(), Status.COMMITTED, AbortReason.NONE, 10, 0)
    assert m.abort_rate == 0.3 and m.write_aborts == 30 and m.tps == 70


def test_failed_no_retry_stays_out_of_abort_rate():
    m = Metrics(duration_s=1.0)
    m.on_attempt(_txn(), Status.COMMITTED, AbortReason.NONE, 10, 0)
    m.on_attempt(_txn(), Status.FAILED_NO_RETRY, AbortReason.DUPLICATE_KEY, 10, 0)
    assert m.abort_rate == 0.0 and m.failed_no_retry == 1 and m.attempts == 2


def test_percentiles_nearest_rank():
    m = Metrics()
    for rt in range(1, 101):
        m.on_attempt(_txn(), Status.COMMITTED, AbortReason.NONE, rt, 0)
    assert m.percentile_rt_us(99) == 99 and m.percentile_rt_us(50) == 50 and m.mean_rt_us == 50.5
    assert Metrics().p99_rt_us == 0.0


def test_series_rows():
    m = Metrics()
    m.on_attempt(_txn(), Status.COMMITTED, AbortReason.NONE, 1_500_000, 0)
    m.on_attempt(_txn(), Status.ABORTED, AbortReason.READ_VALIDATION, 1_600_000, 0)
    assert m.series(3) == [(0, 0, 0.0), (1, 1, 0.5), (2, 0, 0.0)] and m.read_aborts == 1


def test_mean_and_rse():
    assert mean([]) == 0.0 and rse([5.0]) == 0.0
    assert rse([1.0, 3.0]) == pytest.approx((2 ** 0.5) / (2 * 2 ** 0.5))


# --- config ---------------------------------------------------------------------------


def test_throttle_parse():
    assert ThrottleConfig.parse("rate:100") == ThrottleConfig("rate", 100.0)
    assert str(ThrottleConfig.parse("RT:5")) == "rt:5"
    assert ThrottleConfig.parse("none").kind == "none"
    for bad in ("rate", "rate:x", "rt:-1", "burst:3"):
        with pytest.raises(ConfigurationError):
            ThrottleConfig.parse(bad)


@pytest.mark.parametrize("changes", [
    {"benchmark": "ycsb"}, {"protocol": "mvcc"}, {"threads": 0}, {"scale": 0}, {"phase2_seconds": 0},
    {"repetitions": 0}, {"driver": "gpu"}, {"policy": "count/max"}, {"deadlock": "detect"},
])
def test_config_validation(changes):
    with pytest.raises(ConfigurationError):
        SMALL.with_(**changes)


def test_continuous_rejects_threaded_driver():
    with pytest.raises(ConfigurationError):
        run_continuous(SMALL.with_(driver="threads", continuous=True, policy="random"))


# --- throttles -------------------------------------------------------------------------


def test_fixed_rate_admissions():
    throttle = FixedRate(100)
    admitted = 0
    while throttle.next_admission(0) < 10_000_000:
        admitted += 1
    assert abs(admitted - 1000) <= 5


def test_make_throttle():
    assert make_throttle(ThrottleConfig()) is None
    assert isinstance(make_throttle(ThrottleConfig("rate", 5)), FixedRate)
    assert make_throttle(ThrottleConfig("rt", 2)).target_us == 2000


def test_rt_controller_backs_off_under_overload():
    """A FIFO server with 1 ms service time, offered 3x its capacity."""
    target = 5_000
    ctl = ResponseTimeController(target, initial_tps=3000)
    service, free_at, now = 1_000, 0, 0
    completions: list[tuple[int, int]] = []
    while now < 30_000_000:
        now = ctl.next_admission(now)
        while completions and completions[0][0] <= now:
            done, rt = heapq.heappop(completions)
            ctl.observe(rt, done)
        start = max(now, free_at)
        free_at = start + service
        heapq.heappush(completions, (free_at, free_at - now))
    history = ctl.control_history
    settled = next(i for i, (_, m, _) in enumerate(history) if m <= 1.1 * target)
    rates = [3000] + [r for _, _, r in history[:settled]]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    tail = [r for _, _, r in history[-40:]]
    assert 300 < sum(tail) / len(tail) < 1100  # recovers toward the 1000 tps capacity


def test_throttled_run_admits_at_rate():
    result = run_repetition(SMALL.with_(policy="random", throttle=ThrottleConfig("rate", 100), phase2_seconds=10))
    m = result.metrics
    assert abs(m.commits - 1000) <= 5
    assert m.mean_rt_us < 10_000


# --- experiment protocol ----------------------------------------------------------------


def test_ledger_reconciles_with_engine():
    result = run_repetition(SMALL.with_(benchmark="tatp"))
    m = result.metrics
    assert m.commits + m.aborts + m.failed_no_retry == result.engine_attempts
    assert m.failed_no_retry > 0 or m.commits > 0


def test_series_sums_to_commits():
    result = run_repetition(SMALL.with_(benchmark="tpcc", scale=0.05, phase2_seconds=2))
    m = result.metrics
    assert sum(c for _, c, _ in m.series(2)) == m.commits


def _snapshot(history):
    return {r: tuple(e) for r, e in history.entries.items()}


def test_phase1_is_reproducible():
    cfg = SMALL.with_(benchmark="tpcc", scale=0.05)
    a, b = run_phase1(cfg), run_phase1(cfg)
    assert _snapshot(a) == _snapshot(b) and len(a) > 0 and not a.writable


def test_phase1_skipped_for_baselines():
    result = run_repetition(SMALL.with_(policy="random"))
    assert len(result.history) == 0 and result.state is None


def test_hard_partitioning_beats_random_on_partitioned_fixture():
    cfg = ExperimentConfig(threads=4, phase2_seconds=2)

    def abort_rate(policy):
        result = _run(cfg, 0, "phase2", parse_policy(policy, 4), History().freeze(), None, 2.0, skewed=False,
                      workload=Partitioned(4, 4, 4))
        return result.metrics.abort_rate

    hard, rand = abort_rate("hard"), abort_rate("random")
    assert hard < rand and hard < 0.05


def test_continuous_mode_samples_every_second():
    cfg = SMALL.with_(continuous=True, skew=SkewSchedule.parse("uniform:2,zipf0.9:2"), regenerate_seconds=2)
    result = run_continuous(cfg)
    assert [round(s.second) for s in result.samples] == [1, 2, 3, 4]
    assert result.samples[-1].commits == result.metrics.commits
    assert result.history.generation == 2


def test_report_rows_and_csv():
    report = run_experiment(SMALL.with_(repetitions=2))
    table = rows(report)
    assert [r["rep"] for r in table] == [0, 1, "mean"]
    assert table[-1]["tps"] == pytest.approx(report.mean("tps"))
    buf = io.StringIO()
    write_rows(report, buf)
    parsed = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(parsed[0]) == COLUMNS and len(parsed) == 4
    assert parsed[1][COLUMNS.index("policy")] == "count/max/canonical/single"


def test_experiment_writes_csv_and_figures(tmp_path):
    out = tmp_path / "nested" / "run.csv"
    cfg = SMALL.with_(continuous=True, phase2_seconds=2, out=str(out))
    run_experiment(cfg)
    assert out.exists() and (tmp_path / "nested" / "run_series.csv").exists()
    for name in ("run_summary.png", "run_series.png"):
        png = tmp_path / "nested" / name
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_threaded_driver_smoke():
    result = run_repetition(SMALL.with_(driver="threads", phase1_seconds=0.2, phase2_seconds=0.5))
    m = result.metrics
    assert m.commits > 0
    assert m.commits + m.aborts + m.failed_no_retry == result.engine_attempts
