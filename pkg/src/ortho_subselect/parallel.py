"""Deterministic parallel map over independent per-index tasks.

Tasks must be pure functions of their index (all our trial workloads are:
each trial derives its own seed). Results come back in index order, so the
schedule cannot leak into any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "ORTHO_SUBSELECT_THREADS"


def thread_count(requested: int | None = None) -> int:
    """Effective worker count: explicit argument, else the environment
    variable, else auto. 0 means auto (one per CPU)."""
    if requested is None:
        try:
            requested = int(os.environ.get(THREADS_ENV, "0"))
        except ValueError:
            requested = 0
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def run_indexed(fn, count: int, threads: int | None = None) -> list:
    """Evaluate fn(0..count-1), returning results in index order."""
    workers = thread_count(threads)
    if workers == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(workers, count)) as pool:
        return list(pool.map(fn, range(count)))
