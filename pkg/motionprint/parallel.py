"""
Worker pool helpers

Thread-backed joblib pools; results always come back in input order.
"""

import logging
import os
from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, cpu_count, delayed

from motionprint.errors import InvalidInputError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "DRE_THREADS"


def resolve_threads(n_jobs: Optional[int] = None) -> int:
    """Explicit value, else DRE_THREADS, else the CPU count"""
    if n_jobs is None:
        raw = os.getenv(THREADS_ENV)
        if raw:
            try:
                n_jobs = int(raw)
            except ValueError:
                raise InvalidInputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        else:
            n_jobs = cpu_count()
    if n_jobs < 1:
        raise InvalidInputError(f"thread count must be at least 1, got {n_jobs}")
    return int(n_jobs)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], n_jobs: int = 1) -> List[R]:
    items = list(items)
    if n_jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    # workers share the caller's objects; fn must not mutate them
    return Parallel(n_jobs=min(n_jobs, len(items)), prefer="threads")(delayed(fn)(item) for item in items)
