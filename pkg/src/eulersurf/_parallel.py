"""Deterministic worker-pool helper for the scan algorithms.

Workers are forked processes so numpy-heavy chunks run truly in parallel;
results are combined in task order, and all accumulations are integer, so
output is bit-identical for any worker count.  Pools persist per worker
count to amortize startup across repeated calls.
"""

import atexit
import multiprocessing

_pools = {}


def _get_pool(workers):
    pool = _pools.get(workers)
    if pool is None:
        pool = multiprocessing.get_context("fork").Pool(workers)
        _pools[workers] = pool
    return pool


def map_in_order(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    return _get_pool(workers).map(fn, tasks)


@atexit.register
def _shutdown():
    for pool in _pools.values():
        pool.terminate()
    _pools.clear()
