from __future__ import annotations
import itertools
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

from .. import config

T = TypeVar("T")
R = TypeVar("R")


def chunked(seq: Iterable[T], size: int) -> Iterable[List[T]]:
    it = iter(seq)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def pmap(fn: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> List[R]:
    """Map in a thread pool capped by KSAT_LAB_THREADS; results keep input order."""
    threads = config.THREADS if threads is None else max(1, threads)
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
