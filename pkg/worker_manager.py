"""Worker management for sbfctl."""
import logging
import queue
import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


@dataclass
class TaskResult:
    """Outcome of one submitted task."""
    index: int
    value: Any = None
    error: Optional[BaseException] = None


class Worker:
    """Single worker thread that runs experiment tasks."""

    def __init__(self, worker_id: int, tasks: "queue.Queue", results: Dict[int, TaskResult],
                 lock: threading.Lock, stop_event: threading.Event):
        """Initialize worker.

        Args:
            worker_id: Unique worker ID
            tasks: Queue of (index, callable) pairs
            results: Shared result map keyed by task index
            lock: Guards the result map
            stop_event: Event to signal worker to stop
        """
        self.worker_id = worker_id
        self.tasks = tasks
        self.results = results
        self.lock = lock
        self.stop_event = stop_event
        self.thread: Optional[threading.Thread] = None
        self.current_task: Optional[int] = None

    def start(self):
        """Start worker thread."""
        if self.thread and self.thread.is_alive():
            logger.warning(f"Worker {self.worker_id} is already running")
            return
        self.thread = threading.Thread(target=self._run, daemon=True)
        self.thread.start()
        logger.debug(f"Worker {self.worker_id} started")

    def join(self, timeout: Optional[float] = None):
        if self.thread:
            self.thread.join(timeout)

    def _run(self):
        while not self.stop_event.is_set():
            try:
                index, task = self.tasks.get_nowait()
            except queue.Empty:
                break
            self.current_task = index
            logger.debug(f"Worker {self.worker_id} running task {index}")
            try:
                result = TaskResult(index, value=task())
            except Exception as e:
                logger.warning(f"Worker {self.worker_id} task {index} failed: {e}")
                result = TaskResult(index, error=e)
            with self.lock:
                self.results[index] = result
            self.current_task = None
            self.tasks.task_done()
        logger.debug(f"Worker {self.worker_id} stopped")


class WorkerManager:
    """Runs independent tasks on a pool of threads with ordered results."""

    def __init__(self, worker_count: int = 1):
        """Initialize worker manager.

        Args:
            worker_count: Number of worker threads
        """
        if worker_count < 1:
            raise ValueError("worker_count must be a positive integer")
        self.worker_count = worker_count
        self.workers: List[Worker] = []
        self.stop_event = threading.Event()

    def run(self, tasks: Sequence[Callable[[], Any]]) -> List[Any]:
        """Run every task and return the values in submission order.

        Raises:
            The first task error in submission order, after all tasks finish
        """
        results = self.run_collect(tasks)
        for r in results:
            if r.error is not None:
                raise r.error
        return [r.value for r in results]

    def run_collect(self, tasks: Sequence[Callable[[], Any]]) -> List[TaskResult]:
        """Run every task; errors are captured per task instead of raised."""
        work: "queue.Queue" = queue.Queue()
        for index, task in enumerate(tasks):
            work.put((index, task))
        results: Dict[int, TaskResult] = {}
        lock = threading.Lock()
        self.stop_event.clear()
        self.workers = [Worker(i + 1, work, results, lock, self.stop_event)
                        for i in range(min(self.worker_count, max(len(tasks), 1)))]
        for worker in self.workers:
            worker.start()
        try:
            for worker in self.workers:
                worker.join()
        except KeyboardInterrupt:
            logger.warning("Interrupted; stopping workers after their current task")
            self.stop_all()
            raise
        self.workers = []
        missing = [i for i in range(len(tasks)) if i not in results]
        for i in missing:
            results[i] = TaskResult(i, error=RuntimeError("task was not run (stopped)"))
        logger.info(f"Ran {len(tasks)} task(s) on {self.worker_count} worker(s)")
        return [results[i] for i in range(len(tasks))]

    def stop_all(self):
        """Ask workers to stop after their current task."""
        self.stop_event.set()
        for worker in self.workers:
            worker.join(timeout=30)
        logger.info("All workers stopped")

    def get_worker_status(self) -> List[Dict]:
        """Get status of all workers."""
        return [{
            "id": w.worker_id,
            "running": bool(w.thread and w.thread.is_alive()),
            "current_task": w.current_task,
        } for w in self.workers]
