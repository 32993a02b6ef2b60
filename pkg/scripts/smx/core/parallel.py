"""
Chunked, seed-stable evaluation helpers.

Large Monte Carlo jobs are cut into fixed-size chunks. Chunk k always draws
from `chunk_rng(seed, k)`, i.e. numpy's SeedSequence(entropy=seed,
spawn_key=(k,)), so the merged result does not depend on how many workers
ran the chunks or in which order they finished.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from dotenv import load_dotenv

T = TypeVar("T")

DEFAULT_CHUNK_SIZE = 65536


def chunk_rng(seed: int, k: int) -> np.random.Generator:
    """Generator for chunk k of a job seeded with `seed`."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(k),)))


def chunk_sizes(total: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> List[int]:
    """Split `total` draws into full chunks plus one remainder chunk."""
    if total < 1:
        return []
    full, rest = divmod(int(total), int(chunk_size))
    return [int(chunk_size)] * full + ([rest] if rest else [])


def default_workers() -> int:
    load_dotenv()
    try:
        return max(1, int(os.getenv("SMX_WORKERS", "1")))
    except ValueError:
        return 1


def run_chunks(job: Callable[[int], T], n_chunks: int, workers: Optional[int] = None) -> List[T]:
    """Run job(k) for k in range(n_chunks); results come back in chunk order."""
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n_chunks <= 1:
        return [job(k) for k in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, range(n_chunks)))


@dataclass
class MomentSums:
    """Count, sum and sum of squares of a sample; merging is exact (math.fsum)."""
    count: int = 0
    partial_sums: List[float] = field(default_factory=list)
    partial_squares: List[float] = field(default_factory=list)

    @classmethod
    def of(cls, values: np.ndarray) -> "MomentSums":
        values = np.asarray(values, dtype=np.float64)
        return cls(int(values.size), [math.fsum(values)], [math.fsum(values * values)])

    def merge(self, other: "MomentSums") -> "MomentSums":
        return MomentSums(self.count + other.count,
                          self.partial_sums + other.partial_sums,
                          self.partial_squares + other.partial_squares)

    @classmethod
    def combine(cls, parts: Sequence["MomentSums"]) -> "MomentSums":
        total = cls()
        for part in parts:
            total = total.merge(part)
        return total

    @property
    def mean(self) -> float:
        return math.fsum(self.partial_sums) / self.count if self.count else math.nan

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return 0.0
        total = math.fsum(self.partial_sums)
        squares = math.fsum(self.partial_squares)
        variance = max(0.0, (squares - total * total / self.count) / (self.count - 1))
        return math.sqrt(variance / self.count)
