"""Deterministic per-stream seeding and order-preserving parallel maps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

SEED_ENV = "MICROENT_SEED"


def default_threads() -> int:
    return os.cpu_count() or 1


def stream_seeds(master_seed: int, n_streams: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(master_seed).spawn(n_streams)


def stream_generators(master_seed: int, n_streams: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in stream_seeds(master_seed, n_streams)]


def stream_uint32(master_seed: int, n_streams: int) -> list[int]:
    """32-bit integer seeds, one per stream, for RNGs that take a plain integer."""
    return [int(s.generate_state(1, dtype=np.uint32)[0]) for s in stream_seeds(master_seed, n_streams)]


def split_count(total: int, n_parts: int) -> list[int]:
    base, extra = divmod(total, n_parts)
    return [base + (1 if k < extra else 0) for k in range(n_parts)]


def ordered_map(fn: Callable[[T], object], items: Sequence[T], threads: int | None = None) -> list:
    """Map ``fn`` over ``items``; results come back in input order whatever the thread count."""
    threads = threads or default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def resolve_seed(master_seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env not in (None, "") else int(master_seed)
