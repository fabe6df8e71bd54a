"""Chunked, order-preserving execution of trajectory batches.

Ensembles are processed in fixed-size chunks of trajectory indices.  The
chunk size is a constant, and partial results are always combined in
chunk order, so ensemble outputs are bit-identical for any worker count.
Workers run in threads; the heavy lifting inside a chunk is vectorized
numpy that releases the GIL.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

CHUNK = 2048


def chunk_ranges(n: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, n)) for s in range(0, n, chunk)]


def map_chunks(fn, n: int, workers: int = 1, chunk: int = CHUNK) -> list:
    """Apply ``fn(start, stop)`` over chunk ranges, returning results in order."""
    ranges = chunk_ranges(n, chunk)
    if workers <= 1 or len(ranges) <= 1:
        return [fn(s, e) for s, e in ranges]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(lambda r: fn(r[0], r[1]), ranges))
