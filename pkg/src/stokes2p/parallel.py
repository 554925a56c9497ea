"""Deterministic chunked map over a thread pool.

Work is split into chunks of a fixed size that does not depend on the
number of workers, and results are collected in chunk order.  Output is
therefore bit-identical for any thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "STOKES2P_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit value, else the ``STOKES2P_THREADS`` environment variable, else 1."""
    if threads is None:
        env = os.environ.get(ENV_THREADS)
        threads = int(env) if env else 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    return threads


def chunk_ranges(total: int, chunk: int):
    return [(i, min(i + chunk, total)) for i in range(0, total, chunk)]


def ordered_map(func, items, threads: int = 1) -> list:
    """``[func(x) for x in items]`` evaluated on ``threads`` workers, order preserved."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(func, items))
