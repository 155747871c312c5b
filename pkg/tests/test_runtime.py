import threading
import time

import numpy as np
import pytest

from wstasks import (
    ConfigError, DataEnvironment, InvalidBounds, Runtime, RuntimeConfig, SpawnInsideWorksharing,
    TaskBodyError, in_, inout, run,
)
from wstasks.metrics import dependence_violations


def test_empty_program_has_only_start_and_stop(config):
    trace = run(lambda rt: None, config)
    assert [e.kind for e in trace] == ["RuntimeStart", "RuntimeStop"]


def test_independent_task_is_enqueued_without_dependences(config):
    trace = run(lambda rt: rt.spawn(lambda: None), config)
    assert trace.of_kind("Dep") == []
    assert [e.task for e in trace.of_kind("Enqueue")] == [1]


def test_overlapping_second_task_waits_in_region_mode(config):
    def program(rt):
        rt.spawn(lambda: time.sleep(0.01), accesses=[inout("a", 0, 8)])
        rt.spawn(lambda: None, accesses=[inout("a", 2, 4)])
    trace = run(program, config)
    assert trace.dag_edges() == [(1, 2)]
    assert dependence_violations(trace) == []


def test_overlapping_second_task_is_free_in_discrete_mode(config):
    def program(rt):
        rt.spawn(lambda: None, accesses=[inout("a", 0, 8)])
        rt.spawn(lambda: None, accesses=[inout("a", 2, 4)])
    trace = run(program, config.with_(dependence_mode="discrete"))
    assert trace.dag_edges() == []


def test_spawn_inside_worksharing_is_refused(config):
    seen = []

    def body(its, env):
        try:
            rt.spawn(lambda: None)
        except SpawnInsideWorksharing as exc:
            seen.append(exc)

    with Runtime(config) as rt:
        rt.spawn_for(body, 0, 4, chunksize=4)
    assert len(seen) == 1


def test_uncaught_spawn_inside_worksharing_aborts_the_run(config):
    def program(rt):
        rt.spawn_for(lambda its, env: rt.spawn(lambda: None), 0, 4)
    with pytest.raises(TaskBodyError) as info:
        run(program, config)
    assert isinstance(info.value.original, SpawnInsideWorksharing)


@pytest.mark.parametrize("lower,upper,step", [(5, 2, 1), (0, 10, 0), (0, 10, -1)])
def test_bad_loop_bounds(config, lower, upper, step):
    with Runtime(config) as rt:
        with pytest.raises(InvalidBounds):
            rt.spawn_for(lambda its, env: None, lower, upper, step)


def test_zero_trip_loop_finishes_immediately(config):
    with Runtime(config) as rt:
        rt.spawn_for(lambda its, env: pytest.fail("ran"), 3, 3)
    assert len(rt.trace.of_kind("Release")) == 1
    assert rt.trace.of_kind("ChunkAssign") == []


def test_strided_loop_sees_caller_indices(config):
    seen = []
    lock = threading.Lock()

    def body(its, env):
        with lock:
            seen.extend(its)

    with Runtime(config) as rt:
        rt.spawn_for(body, 3, 40, 5, chunksize=2)
    assert sorted(seen) == list(range(3, 40, 5))


def test_taskwait_without_children_returns(config):
    with Runtime(config) as rt:
        rt.taskwait()


def test_taskwait_waits_for_every_child(config):
    counters = [0] * 10

    def bump(i):
        time.sleep(0.001)
        counters[i] += 1

    with Runtime(config) as rt:
        for i in range(10):
            rt.spawn(lambda i=i: bump(i))
        rt.taskwait()
        assert counters == [1] * 10


def test_chain_runs_in_spawn_order(config):
    order = []
    with Runtime(config) as rt:
        for i in range(3):
            rt.spawn(lambda i=i: order.append(i), accesses=[inout("x", 0, 1)])
        rt.taskwait()
    assert order == [0, 1, 2]


def test_nested_taskwait_covers_direct_children_only(config):
    log = []

    def grandchild():
        time.sleep(0.03)
        log.append("grandchild")

    def child():
        rt.spawn(grandchild)
        log.append("child")

    def parent():
        rt.spawn(child)
        rt.taskwait()
        log.append("parent after taskwait")

    with Runtime(config) as rt:
        rt.spawn(parent)
    assert log.index("child") < log.index("parent after taskwait")
    assert sorted(log) == ["child", "grandchild", "parent after taskwait"]


def test_blocked_daxpy_matches_serial(config):
    ps, ts = 16 * 1024, 1024
    a, b, c = np.ones(ps), np.full(ps, 2.0), np.full(ps, 3.0)
    with Runtime(config) as rt:
        for blk, lo in enumerate(range(0, ps, ts)):
            def body(lo=lo):
                a[lo:lo + ts] += b[lo:lo + ts] * c[lo:lo + ts]
            rt.spawn(body, accesses=[inout("a", lo, ts)], priority=blk)
    assert np.array_equal(a, np.ones(ps) + 6.0)
    assert rt.trace.dag_edges() == []


def test_same_program_gives_the_same_dag(config):
    def program(rt):
        rt.spawn(lambda: None, accesses=[inout("a", 0, 8)])
        rt.spawn_for(lambda its, env: None, 0, 100, accesses=[in_("a", 0, 4), inout("b", 0, 100)])
        rt.spawn(lambda: None, accesses=[inout("a", 2, 4)])
        rt.spawn_for(lambda its, env: None, 0, 50, accesses=[inout("b", 50, 10)])
    edges = [run(program, config).dag_edges() for _ in range(5)]
    assert all(e == edges[0] for e in edges)
    assert sorted(edges[0]) == [(1, 2), (1, 3), (2, 3), (2, 4)]


def test_every_regular_task_runs_once(config):
    hits = np.zeros(200, dtype=np.int64)
    with Runtime(config) as rt:
        for i in range(200):
            rt.spawn(lambda i=i: hits.__setitem__(i, hits[i] + 1),
                     accesses=[inout("h", i % 7, 3)])
    assert (hits == 1).all()
    assert len(rt.trace.of_kind("TaskStart")) == 200
    assert dependence_violations(rt.trace) == []


def test_each_batch_gets_a_private_environment(config):
    env = DataEnvironment({"scratch": []})
    copies = []
    lock = threading.Lock()

    def body(its, storage):
        storage["scratch"] = list(its)
        with lock:
            copies.append(storage)

    with Runtime(config) as rt:
        rt.spawn_for(body, 0, 64, chunksize=4, env=env)
    assert env.storage == {"scratch": []}
    assert len({id(c) for c in copies}) == len(copies) == len(rt.trace.of_kind("ChunkAssign"))
    assert sorted(i for c in copies for i in c["scratch"]) == list(range(64))


def test_regular_task_receives_environment_storage(config):
    got = []
    with Runtime(config) as rt:
        rt.spawn(lambda s: got.append(s), env=DataEnvironment(42))
    assert got == [42]


def test_exception_in_body_aborts_and_surfaces(config):
    def boom():
        raise RuntimeError("boom")

    with pytest.raises(TaskBodyError) as info:
        run(lambda rt: rt.spawn(boom), config)
    assert isinstance(info.value.original, RuntimeError)
    assert info.value.task_id == 1


@pytest.mark.parametrize("kw", [dict(workers=0), dict(workers=4, team_size=8),
                                dict(workers=4, team_size=0), dict(workers=8, team_size=8, socket_size=4)])
def test_invalid_configurations(kw):
    with pytest.raises(ConfigError):
        RuntimeConfig(**kw)


def test_configuration_from_environment():
    env = {"WSTASKS_WORKERS": "6", "WSTASKS_TEAM_SIZE": "3", "WSTASKS_DEPENDENCE_MODE": "discrete",
           "WSTASKS_PIN": "0", "WSTASKS_TRACE": "yes"}
    cfg = RuntimeConfig.from_env(env)
    assert (cfg.workers, cfg.team_size, cfg.socket_size) == (6, 3, 6)
    assert cfg.dependence_mode.value == "discrete"
    assert cfg.pin is False and cfg.trace is True
    with pytest.raises(ConfigError):
        RuntimeConfig.from_env({"WSTASKS_WORKERS": "many"})


def test_trace_can_be_disabled(config):
    trace = run(lambda rt: rt.spawn(lambda: None), config.with_(trace=False))
    assert len(trace) == 0


def test_runtime_is_quiescent_after_taskwait(config):
    with Runtime(config) as rt:
        for i in range(20):
            rt.spawn_for(lambda its, env: None, 0, 100, accesses=[inout("a", i % 3, 1)])
        rt.taskwait()
        assert rt.quiescent()
