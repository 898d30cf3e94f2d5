"""Ordered parallel map: results come back in input order whatever the
thread count, so reductions over them are scheduling-independent."""
from concurrent.futures import ThreadPoolExecutor


def pmap(fn, items, workers=1):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def argbest(values, maximise=True):
    """Index of the best value; ties go to the lowest index."""
    best = None
    for i, v in enumerate(values):
        if best is None or (v > values[best] if maximise else v < values[best]):
            best = i
    return best
