from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

_T = TypeVar('_T')
_R = TypeVar('_R')


def map_jobs(func: Callable[[_T], _R], items: Iterable[_T], threads: int = 1) -> list[_R]:
    """
    Run independent jobs and return their results in input order.
    With `threads` <= 1 the jobs run inline on the calling thread.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return list(map(func, items))

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))


def derive_seeds(seed: int, n: int) -> list[int]:
    """Independent per-job seeds, stable for a given (seed, n)."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1)[0]) for child in children]
