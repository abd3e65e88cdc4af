import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpcconn.errors import CapacityError, GlobalCapacityError, ReceiveOverflow, SendOverflow
from mpcconn.mpc import MpcConfig, Simulator


def sim_for(words=1000, **kw):
    return Simulator(MpcConfig(input_words=words), **kw)


def test_config_sizes():
    cfg = MpcConfig(input_words=10_000)
    assert cfg.local_words == 100
    assert cfg.global_words == 80_000
    assert cfg.machine_count * cfg.local_words >= cfg.global_words
    assert MpcConfig(input_words=10).local_words == 64
    assert cfg.rounds_per_primitive == 2
    with pytest.raises(ValueError):
        MpcConfig(delta=1.0)


def test_sort_examples():
    sim = sim_for()
    before = sim.metrics.rounds
    assert sim.sort(np.arange(10)).tolist() == list(range(10))
    assert sim.metrics.rounds > before
    rev = np.arange(1000)[::-1]
    assert sim.sort(rev).tolist() == sorted(rev.tolist())
    assert sim.sort(np.array([5])).tolist() == [5]
    rows = np.array([[2, 1], [1, 9], [2, 0], [1, 3]])
    assert sim.sort(rows).tolist() == sorted(rows.tolist())
    assert sim.sort(rows, keys=[0]).tolist() == [[1, 9], [1, 3], [2, 1], [2, 0]]


def test_prefix_sum_examples():
    sim = sim_for()
    assert sim.prefix_sum(np.zeros(5, np.int64)).tolist() == [0] * 5
    assert sim.prefix_sum(np.ones(4, np.int64)).tolist() == [0, 1, 2, 3]
    vals = np.random.default_rng(0).integers(0, 100, 1000)
    ref, acc = [], 0
    for v in vals.tolist():
        ref.append(acc)
        acc += v
    assert sim.prefix_sum(vals).tolist() == ref


def test_colored_sum_examples():
    sim = sim_for()
    u, s = sim.colored_sum(np.array([4, 4, 4]), np.array([1, 2, 3]))
    assert u.tolist() == [4] and s.tolist() == [6]
    u, s = sim.colored_sum(np.array([3, 1, 2]), np.array([7, 8, 9]))
    assert dict(zip(u.tolist(), s.tolist())) == {3: 7, 1: 8, 2: 9}
    rng = np.random.default_rng(1)
    c, x = rng.integers(0, 30, 500), rng.integers(-5, 50, 500)
    ref = {}
    for ci, xi in zip(c.tolist(), x.tolist()):
        ref[ci] = ref.get(ci, 0) + xi
    u, s = sim.colored_sum(c, x)
    assert dict(zip(u.tolist(), s.tolist())) == ref


def test_dedup_filter_predecessor():
    sim = sim_for()
    assert sim.dedup(np.array([7, 7, 7])).tolist() == [7]
    assert sim.dedup(np.array([1, 2, 3])).tolist() == [1, 2, 3]
    rng = np.random.default_rng(2)
    multi = rng.integers(0, 50, 400)
    assert sim.dedup(multi).tolist() == sorted(set(multi.tolist()))
    assert sim.filter(np.arange(6), np.arange(6) % 2 == 0).tolist() == [0, 2, 4]
    assert sim.predecessor(np.array([2, 5, 9]), np.array([1, 2, 6, 100])).tolist() == [-1, 0, 1, 2]
    got = sim.lookup(np.array([9, 2, 5]), np.array([90, 20, 50]), np.array([5, 3, 9]))
    assert got.tolist() == [50, -1, 90]
    assert sim.group_rank(np.array([1, 1, 2, 3, 3, 3])).tolist() == [0, 1, 0, 0, 1, 2]


def test_alltoall_examples():
    sim = sim_for(4096)
    before = sim.metrics.rounds
    sim.alltoall({})
    assert sim.metrics.rounds == before + 1
    assert all(not m.store for m in sim.machines)
    S = sim.S
    sim.alltoall({0: [(0, list(range(S)))]})
    assert sim.machines[0].words == S
    assert sim.metrics.peak_local == S


def test_alltoall_overflows_name_the_machine():
    sim = sim_for(4096)
    S = sim.S
    with pytest.raises(SendOverflow) as e:
        sim.alltoall({3: [(1, [0] * (S // 2 + 1)), (2, [0] * (S // 2 + 1))]})
    assert e.value.machine == 3
    with pytest.raises(ReceiveOverflow) as e:
        sim.alltoall({0: [(5, [0] * S)], 1: [(5, [1])]})
    assert e.value.machine == 5
    assert e.value.record()["error"] == "receive_overflow"


def test_alltoall_conserves_payload():
    sim = sim_for(10_000)
    rng = np.random.default_rng(3)
    P, S = sim.P, sim.S
    blocks = [tuple(rng.integers(0, 10 ** 6, 3).tolist()) for _ in range(1000)]
    dst = rng.permutation(len(blocks)) % P
    out = {}
    for i, b in enumerate(blocks):
        out.setdefault(i % P, []).append((int(dst[i]), b))
    assert all(sum(len(b) for _, b in v) <= S for v in out.values())
    delivered = sim.alltoall(out)
    got = sorted(b for bs in delivered.values() for b in bs)
    assert got == sorted(blocks)


def _round_states(schedule):
    sim = sim_for(2000, schedule=schedule, record_states=True)
    sim.load([(i, i * i) for i in range(300)])

    def step(mid, store):
        return [], [((w[0] * 7) % sim.P, (w[0], w[1] + mid)) for w in store]

    for _ in range(3):
        sim.run_round(step)
    return sim.state_log


def test_schedule_independence():
    P = sim_for(2000).P
    ref = _round_states(None)
    rng = np.random.default_rng(4)
    for _ in range(5):
        assert _round_states(rng.permutation(P).tolist()) == ref


def test_faithful_local_matches_global():
    P = sim_for(5000).P
    data = np.arange(3000)
    ref = sim_for(5000).local(lambda a: (a * 3 + 1,), data)[0]
    for seed in range(3):
        sched = np.random.default_rng(seed).permutation(P).tolist()
        sim = sim_for(5000, schedule=sched, faithful=True, record_states=True)
        out = sim.local(lambda a: (a * 3 + 1,), data)[0]
        assert out.tolist() == ref.tolist()


def test_schedule_must_be_permutation():
    with pytest.raises(ValueError):
        sim_for(1000, schedule=[0, 0, 1])


def test_global_capacity_enforced():
    sim = sim_for(100)
    with pytest.raises(GlobalCapacityError):
        sim.sort(np.arange(sim.global_cap))
    with pytest.raises(CapacityError):
        sim.require_local(sim.S + 1)


def test_seed_search_charged_once():
    sim = sim_for(1000)
    r0 = sim.metrics.rounds
    passes = sim.aggregate_seeds(10 * sim.S)
    assert passes >= 1
    assert sim.metrics.rounds - r0 == sim.config.rounds_per_primitive
    assert sim.metrics.counters["seed_passes"] == passes


@given(st.lists(st.integers(0, 10 ** 6), max_size=400))
def test_accounting_invariants(xs):
    sim = sim_for(2000)
    seen = []
    a = np.array(xs, dtype=np.int64)
    for op in (sim.sort, sim.dedup, sim.prefix_sum):
        op(a)
        seen.append((sim.metrics.rounds, sim.metrics.total_ops, sim.metrics.peak_global))
    assert seen == sorted(seen)
    assert sim.metrics.peak_global <= sim.P * sim.S
    d = sim.metrics.to_dict()
    assert list(d)[:4] == ["rounds", "peak_local", "peak_global", "total_ops"]
