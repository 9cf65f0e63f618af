"""Chunked worker-pool helper with ordered results."""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")


def chunk_slices(n_items: int, chunk_size: int) -> List[slice]:
    """Contiguous slices covering range(n_items)."""
    chunk_size = max(1, chunk_size)
    return [slice(s, min(s + chunk_size, n_items)) for s in range(0, n_items, chunk_size)]


def map_chunks(
    fn: Callable[[slice], T],
    n_items: int,
    chunk_size: int,
    threads: int = 1,
    desc: str = "",
) -> List[T]:
    """Apply fn to consecutive slices, possibly on a thread pool.

    Results come back in slice order whatever the scheduling.

    Args:
        fn: Function of a slice
        n_items: Total number of items
        chunk_size: Items per slice
        threads: Pool size; 1 runs inline
        desc: Progress-bar label; empty disables the bar

    Returns:
        List of fn results, one per slice
    """
    slices = chunk_slices(n_items, chunk_size)
    show = bool(desc) and len(slices) > 1 and sys.stderr.isatty()
    if threads <= 1 or len(slices) <= 1:
        return [fn(s) for s in tqdm(slices, desc=desc, disable=not show)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(tqdm(pool.map(fn, slices), total=len(slices), desc=desc, disable=not show))


def map_items(fn: Callable[..., T], items: Sequence, threads: int = 1, desc: str = "") -> List[T]:
    """Apply fn to every item, in order."""
    show = bool(desc) and len(items) > 1 and sys.stderr.isatty()
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=not show)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(tqdm(pool.map(fn, items), total=len(items), desc=desc, disable=not show))
