"""Deterministic thread fan-out capped by ``GAMOWKIT_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def thread_count() -> int:
    raw = os.environ.get("GAMOWKIT_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def map_chunks(fn, values: np.ndarray, min_chunk: int = 16) -> np.ndarray:
    """Apply ``fn`` to contiguous chunks of ``values`` and concatenate in order.

    Each element is computed independently, so the result does not depend on
    the thread count.
    """
    values = np.asarray(values)
    workers = min(thread_count(), max(1, len(values) // min_chunk))
    if workers == 1:
        return fn(values)
    chunks = np.array_split(values, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, chunks))
    return np.concatenate(parts)
