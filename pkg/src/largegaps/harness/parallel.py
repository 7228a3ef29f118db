"""Trial scheduling: per-trial seeds, optional process pool, merge by trial index."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from threadpoolctl import threadpool_limits

from ..errors import ValidationError

THREADS_ENV = "LARGEGAPS_THREADS"


def worker_count(threads: int | None = None) -> int:
    """Number of worker processes: the environment variable overrides the flag."""
    env = os.environ.get(THREADS_ENV)
    value = env if env not in (None, "") else threads
    if value is None:
        return 1
    try:
        count = int(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"thread count must be an integer, got {value!r}") from exc
    if count < 1:
        raise ValidationError(f"thread count must be positive, got {count}")
    return count


def _run_chunk(fn, payload, indices):
    # Single-threaded BLAS keeps every trial bitwise independent of the worker count.
    with threadpool_limits(limits=1):
        return [fn(payload, i) for i in indices]


def map_trials(fn, payload, trials: int, workers: int = 1) -> list:
    """[fn(payload, i) for i in range(trials)], possibly spread over processes.

    ``fn`` must be a module-level function and ``payload`` picklable. Results
    come back in trial order whatever the schedule.
    """
    if workers <= 1 or trials <= 1:
        return _run_chunk(fn, payload, range(trials))
    n_chunks = min(trials, 8 * workers)
    bounds = [trials * c // n_chunks for c in range(n_chunks + 1)]
    chunks = [range(lo, hi) for lo, hi in zip(bounds, bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, fn, payload, chunk) for chunk in chunks]
        out = []
        for fut in futures:
            out.extend(fut.result())
    return out
