"""View-level worker pool for the mask-driven stages.

Workers operate on disjoint read-only inputs; results come back in input
order, and every caller merges them with an associative, commutative
operation (sum / OR), so output is identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        return max(1, os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def map_ordered(fn, items, workers: int | None = 1) -> list:
    """map(fn, items) with results in input order, threaded when workers > 1."""
    items = list(items)
    n = resolve_workers(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
