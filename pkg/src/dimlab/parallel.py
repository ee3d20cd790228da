"""Order-preserving thread map; DIMLAB_THREADS caps the worker count."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("DIMLAB_THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return os.cpu_count() or 1


def pmap(fn, items):
    """list(map(fn, items)), run on a thread pool when more than one thread is allowed.

    The compiled kernels release the GIL, so scale sweeps overlap.
    """
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
