from __future__ import annotations

import random
from collections import Counter

import pytest

from conflictsched.errors import ConfigurationError
from conflictsched.statements import Gran, Rep, extract_references
from conflictsched.workloads import (
    Distribution, Partitioned, SkewSchedule, SmallBank, Tatp, Tpcc, make_workload, scaled, zipf_draw, zipf_pmf,
)
from conflictsched.workloads.tpcc import TpccSizes

# chi-square critical values at the 0.01 level
CHI2_99 = {19: 36.191}


def populated(workload, seed=1):
    return workload.make_database(random.Random(seed))


def test_scaled_rounds_up_and_never_reaches_zero():
    assert scaled(11, 1.0) == 11
    assert scaled(11, 0.01) == 1
    assert scaled(10_000, 0.01) == 100
    assert scaled(24_986, 0.01) == 250
    assert scaled(5, 1e-9) == 1


def test_tpcc_full_scale_sizes():
    sizes = TpccSizes.for_scale(1.0).table_sizes()
    assert sizes["warehouse"] == 11 and sizes["district"] == 110
    assert sizes["stock"] == 110_000 and sizes["item"] == 10_000 and sizes["customer"] == 33_000


def test_tpcc_warehouse_override():
    assert Tpcc(0.1, warehouses=4).partitions() == 4
    assert Tpcc(0.1).partitions() == 2


@pytest.mark.parametrize("workload", [Tpcc(0.01), Tpcc(0.01, warehouses=3), SmallBank(0.01), Tatp(0.01)],
                         ids=["tpcc", "tpcc-w3", "smallbank", "tatp"])
def test_population_matches_declared_sizes(workload):
    db = populated(workload)
    for table, size in workload.spec.table_sizes.items():
        assert db.count(table) == size, table


def test_smallbank_full_scale_population():
    db = populated(SmallBank())
    assert [db.count(t) for t in ("account", "savings", "checking")] == [10_000] * 3


def test_tatp_keeps_one_row_per_subscriber():
    db = populated(Tatp(0.01))
    subs = {k[0] for k in db.values()["access_info"]}
    assert subs == set(range(1, 101))


def test_tpcc_mix_is_even():
    rng = random.Random(3)
    w = Tpcc(0.01)
    share = Counter(w.draw_type(rng) for _ in range(10_000))["NewOrder"] / 10_000
    assert share == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("workload", [SmallBank(0.01), Tatp(0.01)], ids=["smallbank", "tatp"])
def test_mix_within_one_point(workload):
    rng = random.Random(5)
    n = 100_000
    counts = Counter(workload.draw_type(rng) for _ in range(n))
    for name, pct in workload.spec.mix:
        assert counts[name] / n == pytest.approx(pct / 100, abs=0.01), name


def test_smallbank_hot_spot():
    rng = random.Random(11)
    w = SmallBank()
    draws = [w.draw_partition(rng, 0.0) for _ in range(20_000)]
    assert sum(1 <= d <= 50 for d in draws) / len(draws) >= 0.88
    assert max(draws) > 50


def test_zipf_zero_is_uniform():
    rng = random.Random(17)
    n, k = 100_000, 20
    counts = Counter(zipf_draw(rng, k, 0.0) for _ in range(n))
    expected = n / k
    chi2 = sum((counts[i] - expected) ** 2 / expected for i in range(1, k + 1))
    assert chi2 < CHI2_99[k - 1]


def test_zipf_skewed_frequencies_fall_with_rank():
    rng = random.Random(19)
    n, k = 100_000, 10
    counts = Counter(zipf_draw(rng, k, 0.99) for _ in range(n))
    freqs = [counts[i] for i in range(1, k + 1)]
    assert all(a > b for a, b in zip(freqs, freqs[1:]))
    for got, p in zip(freqs, zipf_pmf(k, 0.99)):
        assert got / n == pytest.approx(p, abs=0.01)


def test_zipf_pmf_normalised():
    assert sum(zipf_pmf(50, 0.3)) == pytest.approx(1.0)
    assert zipf_pmf(4, 0.0) == [0.25] * 4


def test_zipf_segment_drives_partitions():
    w = Tpcc(0.01, warehouses=8, skew=SkewSchedule.parse("zipf0.99:10"))
    rng = random.Random(2)
    counts = Counter(w.draw_partition(rng, 1.0) for _ in range(5000))
    assert counts[1] > 2 * counts[8]


@pytest.mark.parametrize("name", ["tpcc", "smallbank", "tatp"])
def test_canonical_closure(name):
    w = make_workload(name, 0.01)
    canonical = set(w.domain_map.mapping.values())
    rng = random.Random(23)
    for now in range(2000):
        txn = w.next_transaction(rng, now / 100)
        w.check_statements(txn.statements)
        for ref in extract_references(txn, Rep.CANONICAL, Gran.SINGLE, w.domain_map):
            attr = ref.split("=", 1)[0]
            assert attr in canonical and w.domain_map.canonical(attr) == attr, ref


@pytest.mark.parametrize("name", ["tpcc", "smallbank", "tatp"])
def test_generation_is_deterministic(name):
    def stream():
        w = make_workload(name, 0.01)
        rng = random.Random(29)
        return [(t.txn_id, t.txn_type, t.partition_key, tuple(map(str, t.statements)))
                for t in (w.next_transaction(rng, 0.0) for _ in range(300))]

    assert stream() == stream()


def test_population_is_deterministic():
    assert populated(Tatp(0.01), 4).values() == populated(Tatp(0.01), 4).values()


def test_partitioned_touches_one_partition():
    w = Partitioned(partitions=4, keys_per_partition=3)
    rng = random.Random(31)
    for _ in range(200):
        txn = w.next_transaction(rng)
        keys = {stmt.predicates[0][2] for stmt in txn.statements}
        assert {k % 4 for k in keys} == {txn.partition_key}


def test_unknown_benchmark():
    with pytest.raises(ConfigurationError):
        make_workload("tpch")


# --- skew schedules -----------------------------------------------------------------


def test_skew_parse_and_lookup():
    s = SkewSchedule.parse("uniform:60, zipf0.3:60,uniform:60")
    assert s.duration == 180 and s.boundaries() == [60, 120, 180]
    assert s.at(0).kind == "uniform"
    assert s.at(60) == Distribution("zipf", 0.3)
    assert s.at(119.9).theta == 0.3
    assert s.at(120).kind == "uniform" and s.at(500).kind == "uniform"


def test_skew_bare_zipf_defaults_theta():
    assert SkewSchedule.parse("zipf:5").at(0).theta == 0.99


def test_empty_schedule_is_uniform():
    assert SkewSchedule().at(10).kind == "uniform"


@pytest.mark.parametrize("text", ["zipf0.3", "gauss:10", "uniform:-1", "zipfx:3"])
def test_skew_parse_errors(text):
    with pytest.raises(ConfigurationError):
        SkewSchedule.parse(text)
