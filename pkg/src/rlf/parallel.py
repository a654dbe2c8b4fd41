"""Fixed-chunk parallel driver for Monte Carlo loops.

Work is split into a fixed number of chunks, each with a random stream
spawned from the caller's generator. The worker count only affects how
chunks are scheduled, never which stream a chunk sees, so results are
byte-identical for any number of workers.
"""

from concurrent.futures import ThreadPoolExecutor

DEFAULT_CHUNKS = 32


def chunk_sizes(total: int, n_chunks: int) -> list[int]:
    n_chunks = max(1, min(n_chunks, total))
    base, extra = divmod(total, n_chunks)
    return [base + (1 if i < extra else 0) for i in range(n_chunks)]


def map_chunks(total, fn, rng, workers=1, n_chunks=DEFAULT_CHUNKS) -> list:
    """Run ``fn(count, chunk_rng)`` over ``total`` trials split into chunks.

    Returns per-chunk results in chunk order; the caller merges them
    (merging in this fixed order keeps float accumulation deterministic).
    """
    if total <= 0:
        return []
    sizes = chunk_sizes(total, n_chunks)
    streams = rng.spawn(len(sizes))
    jobs = list(zip(sizes, streams))
    if workers <= 1:
        return [fn(count, stream) for count, stream in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(job[0], job[1]), jobs))


def map_slices(total, fn, rng, workers=1, n_chunks=DEFAULT_CHUNKS) -> list:
    """Like map_chunks, but hands each chunk its [start, stop) row range so
    callers can slice pre-drawn shared arrays."""
    if total <= 0:
        return []
    sizes = chunk_sizes(total, n_chunks)
    streams = rng.spawn(len(sizes))
    jobs = []
    start = 0
    for size, stream in zip(sizes, streams):
        jobs.append((start, start + size, stream))
        start += size
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
