from __future__ import annotations

import io
import random
import threading

import pytest
from hypothesis import given, strategies as st

from conftest import LITERAL_HISTORY, state_from_counts, literal_state

from conflictsched.history import History
from conflictsched.state import EvictionConfig, StabilityGate, State

# --- History ------------------------------------------------------------------------


def test_abort_counter():
    h = History()
    h.record_abort({"w_id=5"})
    h.record_abort({"w_id=5"})
    assert tuple(h.entries["w_id=5"]) == (2, 0)


def test_empty_refs_are_noop():
    h = History()
    h.record_abort(set())
    h.record_commit(set())
    assert len(h) == 0


def test_commit_counter():
    h = History.from_counts({"i_id=2": (10, 9)})
    h.record_commit({"i_id=2"})
    assert tuple(h.entries["i_id=2"]) == (10, 10)


def test_builds_row_from_events():
    h = History()
    for _ in range(10):
        h.record_abort({"i_id=2"})
        h.record_commit({"i_id=2"})
    assert (h.abort_count("i_id=2"), h.commit_count("i_id=2")) == (10, 10)


def test_never_seen_commit_creates_entry():
    h = History()
    h.record_commit({"x=1"})
    assert tuple(h.entries["x=1"]) == (0, 1)


def test_literal_fixture_abort_counts():
    h = History.from_counts(LITERAL_HISTORY)
    assert h.abort_count("s_quantity=7") == 40
    assert h.abort_count("absent=1") == 0


def test_fraction():
    h = History.from_counts({"a": (20, 60), "b": (0, 20)})
    assert h.fraction("a") == 0.25
    assert h.fraction("b") == 0.0
    assert h.fraction("missing") == 0.0


def test_regenerate():
    h = History.from_counts(LITERAL_HISTORY)
    h.generation = 3
    h.regenerate()
    assert h.generation == 4 and len(h) == 0 and h.abort_count("s_quantity=7") == 0


def test_frozen_history_ignores_writes():
    h = History().freeze()
    h.record_abort({"a"})
    assert len(h) == 0


def test_concurrent_increments_are_exact():
    h = History()

    def work():
        for _ in range(1000):
            h.record_abort({"w_id=1"})
            h.record_commit({"w_id=1"})

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert tuple(h.entries["w_id=1"]) == (4000, 4000)


def test_history_csv():
    buf = io.StringIO()
    History.from_counts({"b=1": (1, 2), "a=1": (3, 4)}).to_csv(buf)
    assert buf.getvalue() == "reference,abort_count,commit_count\na=1,3,4\nb=1,1,2\n"


events = st.lists(st.tuples(st.booleans(), st.sets(st.sampled_from(["a", "b", "c"]), max_size=3)), max_size=50)


@given(events)
def test_history_counts_equal_calls(seq):
    h = History()
    seen = {"a": [0, 0], "b": [0, 0], "c": [0, 0]}
    last = {}
    for aborted, refs in seq:
        (h.record_abort if aborted else h.record_commit)(refs)
        for r in refs:
            seen[r][0 if aborted else 1] += 1
        for r in "abc":
            count = h.abort_count(r)
            assert count >= last.get(r, 0)
            last[r] = count
            assert 0.0 <= h.fraction(r) <= 1.0
    for r, (a, c) in seen.items():
        assert (h.abort_count(r), h.commit_count(r)) == (a, c)


# --- State --------------------------------------------------------------------------


def test_literal_fixture_replay():
    state = literal_state()
    assert state.queue_counts("s_i_id=1") == [2, 0, 0]
    assert state.queue_counts("s_w_id=5") == [2, 1, 1]
    assert state.queue_counts("s_i_id=2") == [0, 1, 1]
    assert state.queue_counts("s_quantity=6") == [0, 1, 1]
    assert state.queue_counts("s_quantity=7") == [2, 0, 0]
    assert state.total_per_queue == [6, 3, 3]
    e = state.get("s_i_id=1")
    assert (e.total, e.argmax) == (2, 0)
    assert state.get("s_w_id=5").total == 4


def test_absent_counts():
    assert State(3).queue_counts("x=1") == [0, 0, 0]


def test_enqueue_from_absent():
    s = State(3)
    s.on_enqueue({"x=1"}, 2, 0.0)
    assert s.queue_counts("x=1") == [0, 0, 1] and s.get("x=1").argmax == 2


def test_enqueue_empty_refs():
    s = State(3)
    s.on_enqueue(set(), 1, 0.0)
    assert len(s) == 0 and s.total_per_queue == [0, 0, 0]


def test_enqueue_rejects_bad_queue():
    with pytest.raises(IndexError):
        State(2).on_enqueue({"a"}, 2, 0.0)


@pytest.mark.parametrize("totals,expected", [([3, 2, 3], 1), ([0, 0, 0], 0), ([6, 4, 4], 1)])
def test_least_loaded(totals, expected):
    s = State(3)
    s.total_per_queue = list(totals)
    assert s.least_loaded_queue() == expected


def test_rate_estimates_arrivals_per_second():
    s = State(1, half_life=1.0)
    for i in range(2000):
        s.on_enqueue({"a"}, 0, i / 50)  # 50 per second
    assert s.get("a").rate == pytest.approx(50, rel=0.05)
    assert s.get("a").rate_at(40 + 10, s.decay) < 0.1


def _hot_fixture():
    s = State(2)
    s.on_enqueue({"hot"}, 0, 0.0)
    for _ in range(20):
        s.on_enqueue({"filler"}, 0, 0.0)
    return s


def test_evict_cold_entry_in_hot_queue():
    s = _hot_fixture()
    s.on_enqueue({"cold"}, 0, 0.0)
    evicted = s.evict_stale(100.0, r_min=0.5, t_min=5, q_hot=10)
    assert "cold" not in s.entries and evicted >= 1


def test_high_rate_entry_retained():
    s = _hot_fixture()
    for i in range(200):
        s.on_enqueue({"busy"}, 0, 100.0 - i / 200)
    s.evict_stale(100.0, r_min=0.5, t_min=500, q_hot=10)
    assert "busy" in s.entries


def test_evict_synthetic_table():
    s = State(2)
    rng = random.Random(7)
    doomed = set(rng.sample(range(1000), 100))
    for i in range(1000):
        ref = f"r={i}"
        if i in doomed:
            s.on_enqueue({ref}, 0, 0.0)  # old, T=1, queue 0
        else:
            for j in range(10):
                s.on_enqueue({ref}, i % 2, 99.0 + j / 100)  # recent, T=10
    for j in range(600):
        s.on_enqueue({f"pad={j}"}, 0, 99.9)
    before = len(s)
    hot = s.total_per_queue[1] + 1
    # queue 0 is the crowded one; recent and low-total pads survive on rate
    assert s.evict_stale(100.0, r_min=0.5, t_min=5, q_hot=hot) == 100
    assert len(s) == before - 100


def test_eviction_keeps_totals_consistent():
    s = _hot_fixture()
    s.on_enqueue({"cold", "other"}, 1, 0.0)
    s.evict_stale(50.0, r_min=0.5, t_min=5, q_hot=0)
    assert s.total_per_queue == [sum(e.queue_counts[q] for e in s.entries.values()) for q in range(2)]


def test_enforce_cap_is_hard_bound():
    s = State(2)
    for i in range(500):
        s.on_enqueue({f"r={i}"}, i % 2, i / 100)
    s.enforce_cap(5.0, 100)
    assert len(s) <= 100 and "r=499" in s.entries


def test_state_csv():
    s = state_from_counts({"a=1": [1, 0]})
    buf = io.StringIO()
    s.to_csv(buf)
    header, row = buf.getvalue().splitlines()
    assert header == "reference,q0,q1,R,T,Q" and row.startswith("a=1,1,0,")


def test_eviction_config_parse():
    cfg = EvictionConfig.parse("r=0.2,t=3,window=2,q=50,cap=10,gate=off")
    assert (cfg.r_min, cfg.t_min, cfg.window, cfg.q_hot, cfg.cap, cfg.gate) == (0.2, 3, 2.0, 50.0, 10, False)
    assert not EvictionConfig.parse("off").enabled
    with pytest.raises(ValueError):
        EvictionConfig.parse("bogus=1")


def test_stability_gate_opens_when_rate_settles():
    gate = StabilityGate(window=5, delta=0.02)
    assert not gate.observe(5, 50, 50)   # first window: 0.5
    assert not gate.observe(10, 60, 140)  # second: 0.1, moved
    assert gate.observe(15, 70, 230)      # third: 0.1, settled
    assert StabilityGate(enabled=False).observe(0, 0, 0)


ops = st.lists(st.tuples(st.sets(st.sampled_from("abcdef"), max_size=4), st.integers(0, 3)), max_size=60)


@given(ops, st.floats(0, 50), st.floats(0, 3), st.integers(0, 10))
def test_state_invariants(seq, now, r_min, t_min):
    s = State(4)
    for i, (refs, q) in enumerate(seq):
        s.on_enqueue(refs, q, i / 10)
    for e in s.entries.values():
        assert e.queue_counts[e.argmax] == max(e.queue_counts)
        assert len(e.queue_counts) == 4
    assert s.total_per_queue == [sum(e.queue_counts[q] for e in s.entries.values()) for q in range(4)]
    rates = {ref: e.rate_at(now + 10, s.decay) for ref, e in s.entries.items()}
    s.evict_stale(now + 10, r_min, t_min, None)
    for ref, rate in rates.items():
        if rate >= r_min:
            assert ref in s.entries
    assert s.total_per_queue == [sum(e.queue_counts[q] for e in s.entries.values()) for q in range(4)]
