"""Chunked worker-pool execution with a deterministic reduction order.

Workers receive `(payload, start, stop)` and return one result per sample
index in `range(start, stop)`. Results are reassembled by chunk position,
never by completion order, so output is identical for every thread count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, TypeVar

from core.errors import PreconditionViolated
from core.logger import debug_log, progress_bar

T = TypeVar("T")

DEFAULT_CHUNK = 250


def _chunks(count: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]


def run_indexed(
    worker: Callable[[Any, int, int], list[T]],
    payload: Any,
    count: int,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    label: str = "samples",
    show_progress: bool = False,
    debug: bool = False,
) -> list[T]:
    """Evaluate `worker` over `range(count)` and return results in index order.

    Input contract:
    - `worker` is a module-level function and `payload` is picklable when
      `threads > 1`.

    Output contract:
    - `len(result) == count`; `result[i]` comes from sample index `i`.

    Side effects:
    - Spawns worker processes when `threads > 1`.
    - Draws a progress bar when `show_progress` is set.
    """

    if threads < 1:
        raise PreconditionViolated(f"threads must be positive, got {threads}")
    chunks = _chunks(count, chunk_size)
    debug_log(debug, "batch_start", {"label": label, "count": count, "threads": threads, "chunks": len(chunks)})
    parts: list[list[T] | None] = [None] * len(chunks)
    with progress_bar(label, count, enabled=show_progress and not debug) as advance:
        if threads == 1:
            for position, (start, stop) in enumerate(chunks):
                parts[position] = worker(payload, start, stop)
                advance(stop - start)
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = {
                    pool.submit(worker, payload, start, stop): position
                    for position, (start, stop) in enumerate(chunks)
                }
                for future in as_completed(futures):
                    position = futures[future]
                    parts[position] = future.result()
                    start, stop = chunks[position]
                    advance(stop - start)
    debug_log(debug, "batch_done", {"label": label, "count": count})
    return [item for part in parts if part is not None for item in part]
