import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

from ..errors import ConfigurationError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """Runs independent work units on a thread pool and returns results in submission order.

    Results never depend on the number of threads: every unit is a pure function of its
    input and the caller reduces the returned list in index order.
    """

    def __init__(self, threads: int = 1, progress: bool = False):
        if threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {threads}")
        self.threads = threads
        self.progress = progress

    def map(self, fn: Callable[[T], R], items: Iterable[T], desc: Optional[str] = None) -> List[R]:
        items = list(items)
        bar = tqdm(total=len(items), desc=desc, disable=not self.progress, leave=False)
        try:
            if self.threads == 1 or len(items) <= 1:
                results = []
                for item in items:
                    results.append(fn(item))
                    bar.update(1)
                return results

            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                results = []
                # executor.map yields in submission order
                for result in executor.map(fn, items):
                    results.append(result)
                    bar.update(1)
                return results
        finally:
            bar.close()
