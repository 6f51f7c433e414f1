from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from sensing.rng import derive_seed

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply fn over items on a thread pool; results keep the input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def trial_seeds(base: int, grid_index: int, trials: int, stream: int = 0) -> List[int]:
    """One independent seed per (grid point, trial); `stream` separates uses at the same point."""
    return [derive_seed(base, stream, grid_index, t) for t in range(trials)]
