"""Order-preserving thread-pool map used by the meshers.

Work is always split into chunks whose boundaries do not depend on the
number of workers, so results are identical for any worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

WORKERS_ENV = "TETRAMESH_WORKERS"


def resolve_workers(workers=None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "").strip()
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    workers = int(workers)
    if workers < 1:
        raise ValueError(f"worker count must be positive, got {workers}")
    return workers


def chunk_bounds(n: int, size: int):
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def pmap(fn, items, workers=None):
    """Apply ``fn`` to each item, returning results in input order."""
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
