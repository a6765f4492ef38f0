import logging
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Sequence

from .worker import evaluate_chunk, run_replica

logger = logging.getLogger(__name__)


class ReplicaRunner:
    """Fans independent tasks over worker processes.

    Task order is preserved and every task carries its own seed, so results
    do not depend on the number of workers. With one worker everything runs
    in the calling process.
    """

    def __init__(self, num_workers: int = 1):
        if num_workers < 1:
            raise ValueError("num_workers must be at least 1")
        self.num_workers = num_workers

    def map(self, fn: Callable[[Dict[str, Any]], Dict[str, Any]],
            tasks: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
        if self.num_workers == 1 or len(tasks) <= 1:
            return [fn(task) for task in tasks]
        workers = min(self.num_workers, len(tasks))
        logger.info("dispatching %d tasks to %d workers", len(tasks), workers)
        with Pool(workers) as pool:
            return pool.map(fn, tasks)

    def run_replicas(self, tasks: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
        """Run engine replicas; see `worker.run_replica` for the task layout."""
        return self.map(run_replica, tasks)

    def evaluate_chunks(self, tasks: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
        """Evaluate per-snapshot generator discrepancies chunk by chunk."""
        return self.map(evaluate_chunk, tasks)
