from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

class ExecutorProvider:
    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers

    def get(self) -> ThreadPoolExecutor:
        return ThreadPoolExecutor(max_workers=self.max_workers)

    def map_ordered(self, fn: Callable[[T], R], items: Sequence[T], on_done: Optional[Callable[[], None]] = None) -> List[R]:
        """Runs ``fn`` over ``items`` concurrently; results keep the input order."""
        if len(items) <= 1 or self.max_workers == 1:
            out = []
            for item in items:
                out.append(fn(item))
                if on_done:
                    on_done()
            return out
        with self.get() as pool:
            futures = [pool.submit(fn, item) for item in items]
            out = []
            for fut in futures:
                out.append(fut.result())
                if on_done:
                    on_done()
            return out
