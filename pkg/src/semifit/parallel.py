"""Bounded thread fan-out for independent fits.

Replicate-level work (benchmark replicates, bootstrap refits) is
embarrassingly parallel and numpy releases the GIL inside the heavy kernels,
so plain threads scale.  Results are always collected in submission order,
which keeps every aggregate bitwise-deterministic regardless of worker
count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

_T = TypeVar("_T")
_R = TypeVar("_R")

__all__ = ["thread_map", "worker_count"]


def worker_count() -> int:
    """Parallelism cap: SEMIFIT_THREADS if set, else the CPU count."""
    env = os.environ.get("SEMIFIT_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ValueError(f"SEMIFIT_THREADS must be an integer, got {env!r}") from exc
        if value < 1:
            raise ValueError("SEMIFIT_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1


def thread_map(fn: Callable[[_T], _R], items: Iterable[_T]) -> list[_R]:
    """Apply ``fn`` to each item, in parallel, preserving item order.

    Exceptions propagate from the position at which they occurred, exactly
    as with the serial path.
    """
    items = list(items)
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
