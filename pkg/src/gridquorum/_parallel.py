"""Order-preserving parallel map for embarrassingly parallel sweep cells."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterator, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> Iterator[R]:
    """Map preserving input order; results are identical for any thread count."""
    if threads <= 1 or len(items) <= 1:
        yield from map(fn, items)
        return
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        yield from pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads)))
