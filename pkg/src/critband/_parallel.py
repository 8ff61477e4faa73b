"""Process-level parallel map with order-preserving aggregation."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "FRCB_WORKERS"


def resolve_workers(workers: int | None) -> int:
    """Explicit value, else the FRCB_WORKERS env var, else 1."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Map fn over items, in input order.

    With workers <= 1 this is a plain loop; otherwise a process pool is used.
    fn and items must be picklable. Results are identical either way as long
    as fn is a pure function of its argument.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    workers = min(workers, len(items))
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def index_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    """Split range(total) into at most `parts` contiguous (start, stop) chunks."""
    parts = max(1, min(parts, total))
    base, extra = divmod(total, parts)
    out = []
    start = 0
    for i in range(parts):
        stop = start + base + (1 if i < extra else 0)
        out.append((start, stop))
        start = stop
    return out
