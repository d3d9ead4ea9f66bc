import logging
import threading
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger("ParallelExecutor")


class ParallelExecutor:
    """Run named tasks on threads, at most max_workers at a time"""

    def __init__(self, max_workers: int = 1):
        self.max_workers = max(1, int(max_workers))
        self.tasks: Dict[str, Any] = {}
        self.failures: Dict[str, BaseException] = {}

    def add_task(self, name: str, task_func: Callable, *args, **kwargs) -> None:
        if name in self.tasks:
            raise ValueError(f"duplicate task name '{name}'")
        self.tasks[name] = (task_func, args, kwargs)

    def execute_parallel(self) -> Dict[str, Any]:
        """
        Execute all tasks

        Returns:
            Results keyed by task name in sorted order; a failed task maps to
            {"error": message} and its exception is kept in self.failures
        """
        results: Dict[str, Any] = {}
        lock = threading.Lock()
        slots = threading.Semaphore(self.max_workers)
        self.failures = {}

        def run_task(name: str, task_func: Callable, args, kwargs) -> None:
            with slots:
                try:
                    result = task_func(*args, **kwargs)
                    with lock:
                        results[name] = result
                    logger.info(f"Task {name} completed")
                except Exception as e:
                    with lock:
                        results[name] = {"error": str(e)}
                        self.failures[name] = e
                    logger.error(f"Task {name} failed: {e}")

        if self.max_workers == 1:
            for name, (task_func, args, kwargs) in self.tasks.items():
                run_task(name, task_func, args, kwargs)
        else:
            threads = []
            for name, (task_func, args, kwargs) in self.tasks.items():
                thread = threading.Thread(target=run_task, args=(name, task_func, args, kwargs), name=f"task-{name}")
                threads.append(thread)
                thread.start()
            for thread in threads:
                thread.join()

        logger.info(f"Parallel execution completed: {len(results)} tasks, {len(self.failures)} failed")
        return {name: results[name] for name in sorted(results)}

    def first_failure(self) -> Optional[BaseException]:
        for name in sorted(self.failures):
            return self.failures[name]
        return None
