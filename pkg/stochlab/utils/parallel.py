import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from stochlab.config import THREADS

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def thread_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Aplica fn a cada elemento con un pool de hilos, conservando el orden.

    El número de hilos está acotado por STOCHLAB_THREADS; con un único hilo
    se evalúa en serie.
    """
    items = list(items)
    workers = min(threads or THREADS, max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def shard_sizes(total: int, shard: int) -> List[int]:
    """Tamaños de shard fijos; el último recoge el resto."""
    if total <= 0:
        return []
    full, rest = divmod(total, shard)
    return [shard] * full + ([rest] if rest else [])


def shard_generators(seed: int, count: int) -> List[np.random.Generator]:
    """
    Generadores independientes por shard.

    Regla de partición: SeedSequence(seed).spawn(count), un hijo por shard en
    orden. El resultado no depende del número de hilos.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]
