"""Small shared helpers."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def parallel_map(fn, items, workers=None):
    """Ordered map, threaded when ``workers > 1``.

    Results always come back in input order, so reductions over them are
    deterministic regardless of scheduling.  LAPACK releases the GIL, which is
    where the time goes.
    """
    items = list(items)
    if not workers or workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(fn, items))


def periodic_grid(n):
    """n uniform nodes on (-pi, pi]."""
    return -np.pi + 2 * np.pi * (np.arange(n) + 1) / n


def wrap_phase(x):
    """Map angles to (-pi, pi]."""
    y = np.angle(np.exp(1j * np.asarray(x, float)))
    return np.where(y <= -np.pi, y + 2 * np.pi, y)
