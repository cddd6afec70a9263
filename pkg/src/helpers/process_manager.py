from contextlib import contextmanager
from typing import Callable, Iterable, TypeVar
import multiprocessing as mp

T = TypeVar("T")
R = TypeVar("R")


@contextmanager
def managed_pool(workers: int):
    """
    Yield a spawn-context process pool, or None when `workers` <= 1.
    Spawn keeps children free of the parent's torch thread state.
    """
    if workers <= 1:
        yield None
        return

    pool = mp.get_context("spawn").Pool(processes=workers)
    try:
        yield pool
        pool.close()
    finally:
        pool.terminate()
        pool.join()


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    """Map `fn` over `items`, in parallel when allowed; results keep input order."""
    items = list(items)
    with managed_pool(min(workers, len(items))) as pool:
        if pool is None:
            return [fn(item) for item in items]
        return pool.map(fn, items)
