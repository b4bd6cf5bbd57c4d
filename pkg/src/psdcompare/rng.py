"""Counter-based random streams and deterministic block-parallel reduction.

Every random draw is addressed by a tuple key ``(seed, *counters)`` that is
hashed into a Philox key.  Monte Carlo loops split their trials into fixed
size blocks keyed by ``(seed, stream, block)``; the per-block partial results
are combined in block order, so results never depend on the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy.special import ndtri

BLOCK_SIZE = 1024
_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53

T = TypeVar("T")


def stream(seed: int, *counters: int) -> np.random.Generator:
    """Return the generator addressed by ``(seed, *counters)``."""
    words = [int(seed) & _MASK64, *(int(c) & _MASK64 for c in counters)]
    ss = np.random.SeedSequence(words)
    return np.random.Generator(np.random.Philox(ss))


def uniform_open(rng: np.random.Generator, size) -> np.ndarray:
    """53-bit uniforms on the open interval (0, 1)."""
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) * _TWO_M53


def normal(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normals by inverse CDF of open-interval uniforms."""
    return ndtri(uniform_open(rng, size))


def worker_count() -> int:
    """Worker cap from ``PSDC_THREADS`` (default 1). Affects speed only."""
    raw = os.environ.get("PSDC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def block_sizes(trials: int, block: int = BLOCK_SIZE) -> list[int]:
    full, rem = divmod(int(trials), block)
    return [block] * full + ([rem] if rem else [])


def map_blocks(fn: Callable[[int, int], T], trials: int, block: int = BLOCK_SIZE) -> list[T]:
    """Evaluate ``fn(block_index, count)`` over all blocks, in block order."""
    sizes = block_sizes(trials, block)
    workers = min(worker_count(), max(1, len(sizes)))
    if workers == 1:
        return [fn(i, c) for i, c in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def concat_blocks(parts: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate(list(parts), axis=0)
