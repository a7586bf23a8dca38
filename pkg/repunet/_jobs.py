#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

_T = TypeVar("_T")
_R = TypeVar("_R")


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_jobs(fn: Callable[[_T], _R], items: Iterable[_T], jobs: int = 1) -> list[_R]:
    """Applies `fn` to every item on up to `jobs` threads and returns the results in input order.

    The first exception raised by a job is re-raised once all jobs have been submitted.

    >>> run_jobs(lambda x: x * x, [1, 2, 3], jobs=2)
    [1, 4, 9]
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as executor:
        return list(executor.map(fn, items))
