"""Process-pool helper for embarrassingly parallel parameter sweeps."""

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count(explicit=0):
    """Resolve the worker count: explicit > SPINCOMB_WORKERS > cpu count."""
    if explicit and explicit > 0:
        return explicit
    env = os.environ.get("SPINCOMB_WORKERS", "")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items, workers=0):
    """Order-preserving map over a process pool (serial when workers == 1)."""
    items = list(items)
    n = worker_count(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
