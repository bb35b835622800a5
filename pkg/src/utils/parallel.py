"""Thread-pool helpers with deterministic, input-ordered assembly."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

from config.settings import get_setting

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value wins, then the configured default."""
    if threads is None:
        threads = get_setting("threads", 1)
    return max(1, int(threads))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Map `fn` over `items`; results come back in input order."""
    items = list(items)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def split_range(length: int, parts: int) -> List[slice]:
    """Contiguous, near-equal slices covering range(length)."""
    parts = max(1, min(parts, length)) if length else 1
    bounds = [length * p // parts for p in range(parts + 1)]
    return [slice(bounds[p], bounds[p + 1]) for p in range(parts) if bounds[p + 1] > bounds[p]]


def ordered_max(values: Sequence[float]) -> float:
    """Max reduction; order-independent, so bit-deterministic."""
    return max(values) if values else float("-inf")
