"""
Worker pool. Library code only ever sees an order-preserving map.
"""
import logging
from contextlib import contextmanager
from multiprocessing import Pool
from typing import Callable, Iterable

logger = logging.getLogger(__name__)


def serial_map(func: Callable, items: Iterable) -> list:
    return list(map(func, items))


@contextmanager
def worker_pool(jobs: int = 1):
    """Yield pmap(func, items) -> list in input order; serial when jobs == 1."""
    if jobs <= 1:
        yield serial_map
        return
    logger.info("starting %d workers", jobs)
    with Pool(jobs) as p:
        def pmap(func: Callable, items: Iterable) -> list:
            return p.map(func, list(items))
        yield pmap
