"""Tests for the experiment worker pool."""
import threading

import pytest

from worker_manager import WorkerManager


def test_results_in_submission_order():
    manager = WorkerManager(4)
    tasks = [lambda i=i: i * i for i in range(20)]
    assert manager.run(tasks) == [i * i for i in range(20)]
    assert manager.get_worker_status() == []


def test_tasks_run_on_several_threads():
    seen = set()
    lock = threading.Lock()
    barrier = threading.Barrier(2, timeout=5)

    def task():
        barrier.wait()
        with lock:
            seen.add(threading.get_ident())

    WorkerManager(2).run([task, task])
    assert len(seen) == 2


def test_errors_are_collected_per_task():
    def boom():
        raise ArithmeticError("bad")

    results = WorkerManager(2).run_collect([lambda: 1, boom, lambda: 3])
    assert [r.value for r in results] == [1, None, 3]
    assert isinstance(results[1].error, ArithmeticError)
    with pytest.raises(ArithmeticError):
        WorkerManager(2).run([lambda: 1, boom])


def test_worker_count_validated():
    with pytest.raises(ValueError):
        WorkerManager(0)
    assert WorkerManager(3).run([]) == []


def test_stop_all_leaves_queued_tasks_unrun():
    manager = WorkerManager(1)
    started = threading.Event()

    def slow():
        started.set()
        manager.stop_event.wait(5)
        return "done"

    out = {}
    runner = threading.Thread(
        target=lambda: out.update(results=manager.run_collect([slow, slow, slow])))
    runner.start()
    assert started.wait(5)
    manager.stop_all()
    runner.join(10)
    results = out["results"]
    assert results[0].value == "done"
    assert all(isinstance(r.error, RuntimeError) for r in results[1:])
