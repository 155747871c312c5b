import threading

from hypothesis import given, strategies as st

from wstasks import Runtime, TaskDescriptor, TaskKind, inout
from wstasks.scheduler import ReadyQueue, RegularAssignment, Scheduler, WorksharingJoin
from wstasks.worksharing import WorkDescriptor, build_teams, request_chunks


class FakeWorker:
    def __init__(self, wid, team):
        self.id, self.team = wid, team
        self.descriptor = WorkDescriptor(wid)


def regular(tid, priority=0):
    t = TaskDescriptor(lambda: None, priority=priority)
    t.id = tid
    return t


def worksharing(tid, iters=8, cs=1):
    t = TaskDescriptor(lambda its, env: None, TaskKind.WORKSHARING, loop_bounds=(0, iters),
                       chunksize=cs)
    t.id = tid
    return t


def test_higher_priority_first():
    q = ReadyQueue()
    q.push(regular(1, priority=1))
    q.push(regular(2, priority=5))
    assert q.pop()[0].id == 2


def test_equal_priorities_are_fifo():
    q = ReadyQueue()
    for i in range(100):
        q.push(regular(i))
    assert [q.pop()[0].id for _ in range(100)] == list(range(100))


@given(st.lists(st.integers(-5, 5), max_size=60))
def test_pop_order_is_a_stable_sort_by_priority(prios):
    q = ReadyQueue()
    for i, p in enumerate(prios):
        q.push(regular(i, p))
    got = [q.pop()[0].id for _ in prios]
    assert got == sorted(range(len(prios)), key=lambda i: -prios[i])
    assert q.pop() == (None, None)


def test_empty_queue_gives_no_work():
    teams = build_teams(2)
    assert Scheduler(teams).next_work(FakeWorker(0, teams[0])) is None


def test_teammates_join_an_installed_region():
    teams = build_teams(4, 2)
    s = Scheduler(teams)
    w0, w1, w2 = FakeWorker(0, teams[0]), FakeWorker(1, teams[0]), FakeWorker(2, teams[1])
    s.enqueue(worksharing(1))
    s.enqueue(regular(2))
    a = s.next_work(w0)
    assert isinstance(a, WorksharingJoin) and a.task.id == 1
    assert s.next_work(w1).region is a.region
    # the other team never sees the region, only the queue
    assert s.next_work(w2).task.id == 2


def test_late_arrival_after_assignment_dequeues_instead():
    teams = build_teams(2)
    s = Scheduler(teams)
    w0, w1 = FakeWorker(0, teams[0]), FakeWorker(1, teams[0])
    s.enqueue(worksharing(1, iters=1))
    s.enqueue(regular(2))
    join = s.next_work(w0)
    assert request_chunks(join.region, w0) is not None
    assert teams[0].current is None
    assert s.next_work(w1).task.id == 2


def test_no_successors_means_no_bypass():
    teams = build_teams(1)
    assert Scheduler(teams).on_finish([], FakeWorker(0, teams[0])) is None


def test_first_successor_bypasses_the_queue():
    teams = build_teams(1)
    s = Scheduler(teams)
    work = s.on_finish([regular(2), regular(3)], FakeWorker(0, teams[0]))
    assert isinstance(work, RegularAssignment) and work.task.id == 2
    assert [t.id for t, _ in [s.queue.pop()]] == [3]
    assert s.bypassed == 1


def test_chain_runs_on_the_releasing_worker():
    done = []
    with Runtime(workers=2, pin=False) as rt:
        gate = threading.Event()
        rt.spawn(lambda: gate.wait(5), accesses=[inout("x", 0, 1)])
        rt.spawn(lambda: done.append(threading.current_thread().name), accesses=[inout("x", 0, 1)])
        gate.set()
    tr = rt.trace
    t1, t2 = 1, 2
    bypass = [e for e in tr.of_kind("Bypass") if e.task == t2]
    assert len(bypass) == 1
    assert not [e for e in tr.of_kind("Enqueue") if e.task == t2]
    release = [e for e in tr.of_kind("Release") if e.task == t1][0]
    start = [e for e in tr.of_kind("TaskStart") if e.task == t2][0]
    assert bypass[0].worker == release.worker == start.worker


def test_dequeues_respect_priority_at_every_instant():
    # a blocker holds the single worker while tasks of mixed priority queue up
    import random
    rng = random.Random(3)
    gate = threading.Event()
    with Runtime(workers=1, pin=False) as rt:
        rt.spawn(lambda: gate.wait(5))
        for _ in range(40):
            rt.spawn(lambda: None, priority=rng.randint(0, 4))
        gate.set()
    queued = {}
    for e in rt.trace.of_kind("Enqueue", "Dequeue"):
        if e.kind == "Enqueue":
            queued[e.task] = (e.lo, e.timestamp)
        else:
            best = max(queued.values(), key=lambda v: (v[0], -v[1]))
            assert queued.pop(e.task) == best
