"""Ordered fan-out of independent work items.

Results always come back in task order, so reductions are identical for any
worker count.
"""

from concurrent.futures import ProcessPoolExecutor


def ordered_map(fn, tasks, threads: int = 1):
    tasks = list(tasks)
    if threads is None or threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as ex:
        return list(ex.map(fn, tasks, chunksize=1))
