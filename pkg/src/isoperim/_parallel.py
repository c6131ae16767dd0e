import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker threads from ISOPERIM_THREADS; unset means 1, 0 means one per CPU."""
    raw = os.environ.get("ISOPERIM_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        n = 1
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def ordered_map(fn, items):
    """map() that may use threads but always returns results in input order."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
