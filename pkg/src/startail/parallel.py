"""Deterministic block-parallel random streams.

Every random computation is split into fixed-size blocks. Block ``b`` draws
from its own generator seeded by ``SeedSequence(seed, spawn_key=(..., b))``,
so the concatenated output depends only on the seed and the block size, never
on how many worker threads executed the blocks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

BLOCK_SIZE = 1 << 16

_default_threads = 1


def set_default_threads(threads: int) -> None:
    global _default_threads
    if threads < 1:
        raise ValueError("threads must be >= 1")
    _default_threads = int(threads)


def default_threads() -> int:
    return _default_threads


def _entropy(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        seed = (int(seed),)
    out = [int(s) for s in seed]
    if any(s < 0 for s in out):
        raise ValueError("seeds must be non-negative integers")
    return out


def substream(seed, *key: int) -> np.random.Generator:
    """Generator for the stream addressed by ``key`` under ``seed``.

    ``seed`` may be an int or a tuple of ints (a seed already derived from a
    parent stream).
    """
    ss = np.random.SeedSequence(_entropy(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed, *key: int) -> tuple[int, ...]:
    """A seed tuple for a nested computation (e.g. one trial block)."""
    return tuple(_entropy(seed)) + tuple(int(k) for k in key)


def block_sizes(n: int, block_size: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(int(n), block_size)
    return [block_size] * full + ([rest] if rest else [])


def map_blocks(fn: Callable[[int], T], n_blocks: int, threads: int | None = None) -> list[T]:
    """Run ``fn(b)`` for every block index and return results in block order."""
    threads = default_threads() if threads is None else int(threads)
    if threads <= 1 or n_blocks <= 1:
        return [fn(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_blocks)))


def concat(parts: Sequence[np.ndarray], dim: int) -> np.ndarray:
    if not parts:
        return np.empty((0, dim))
    return np.concatenate(parts, axis=0)
