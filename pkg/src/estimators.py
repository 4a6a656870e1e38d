"""
Fixed-level Monte Carlo and the randomized coupled-sum unbiased estimator.

Samples are processed in fixed-size blocks. A block's randomness depends only
on (seed, block index), so results do not depend on how many workers evaluate
the blocks; block summaries are merged in a fixed pairwise tree.
"""

import asyncio
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigurationError, ParameterError
from .payoffs import Payoff
from .rate_models import RateModel
from .rng_distributions import PathStreams, RngStream, StreamRole, sample_uniform
from .scheme import coupled_level_draw, fine_level_draw
from .variance_process import HestonParams

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 8192
DEFAULT_TAIL_EXPONENT = 1.5

BlockKernel = Callable[[int, int], Tuple[np.ndarray, np.ndarray]]

@dataclass(frozen=True)
class LevelDistribution:
    """Law of the randomized level through its tail P(N >= n).

    Either geometric, tail(n) = 2^(-exponent * n), or an explicit table
    (tail(n) = table[n], zero past the end).
    """

    exponent: Optional[float] = DEFAULT_TAIL_EXPONENT
    table: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.table is not None:
            table = tuple(float(v) for v in self.table)
            object.__setattr__(self, 'table', table)
            object.__setattr__(self, 'exponent', None)
            if not table or table[0] != 1.0:
                raise ConfigurationError("Tail table must start with P(N >= 0) = 1")
            if any(b > a for a, b in zip(table, table[1:])) or table[-1] < 0:
                raise ConfigurationError("Tail table must be nonincreasing and nonnegative")
        elif self.exponent is None or not (math.isfinite(self.exponent) and self.exponent > 0):
            raise ConfigurationError(f"Tail exponent must be positive, got {self.exponent}")

    @classmethod
    def geometric(cls, exponent: float = DEFAULT_TAIL_EXPONENT) -> 'LevelDistribution':
        return cls(exponent=float(exponent))

    @classmethod
    def from_table(cls, table: Sequence[float]) -> 'LevelDistribution':
        return cls(exponent=None, table=tuple(table))

    @classmethod
    def degenerate(cls, level: int) -> 'LevelDistribution':
        """Point mass at ``level``."""
        return cls.from_table([1.0] * (int(level) + 1))

    def tail(self, n: int) -> float:
        if n < 0:
            return 1.0
        if self.table is not None:
            return self.table[n] if n < len(self.table) else 0.0
        return 2.0 ** (-self.exponent * n)

    def probability(self, n: int) -> float:
        return self.tail(n) - self.tail(n + 1)

    @property
    def label(self) -> str:
        if self.table is not None:
            return f"table[{len(self.table)}]"
        return f"2^(-{self.exponent:g}n)"

@dataclass
class WorkEstimate:
    partial_sum: float
    remainder_bound: float
    divergent: bool

@dataclass
class EstimatorReport:
    mean: float
    std_error: float
    n_samples: int
    avg_work_units: float
    elapsed_seconds: float
    label: str = ''

    def ci(self, z: float = 1.96) -> Tuple[float, float]:
        return self.mean - z * self.std_error, self.mean + z * self.std_error

    def to_dict(self) -> dict:
        lo, hi = self.ci()
        return {'label': self.label, 'mean': self.mean, 'std_error': self.std_error, 'ci_lo': lo, 'ci_hi': hi,
                'n_samples': self.n_samples, 'avg_work_units': self.avg_work_units,
                'elapsed_seconds': self.elapsed_seconds}

@dataclass(frozen=True)
class Standard:
    """Plain Monte Carlo at one fixed level."""

    level: int

    @property
    def label(self) -> str:
        return f"standard(level={self.level})"

@dataclass(frozen=True)
class CoupledSum:
    label: str = 'coupled_sum'

EstimatorKind = Union[Standard, CoupledSum]

def sample_level(d: LevelDistribution, rng: RngStream, size=None) -> np.ndarray:
    """Inversion on the tail: N >= n exactly when U' <= tail(n), U' uniform on (0, 1]."""
    u = 1.0 - sample_uniform(rng, size)
    if d.table is not None:
        tails = np.asarray(d.table[1:], dtype=float)
        if tails.size == 0:
            return np.zeros(np.shape(u), dtype=np.int64)
        return np.sum(np.asarray(u)[..., None] <= tails, axis=-1).astype(np.int64)
    return np.floor(-np.log2(u) / d.exponent).astype(np.int64)

def expected_work(d: LevelDistribution, n_max_for_sum: int = 60) -> WorkEstimate:
    """Partial sum of 2^n P(N >= n) up to ``n_max_for_sum`` with a bound on the rest."""
    partial_sum = math.fsum(2.0 ** n * d.tail(n) for n in range(n_max_for_sum + 1))
    if d.table is not None:
        rest = math.fsum(2.0 ** n * d.tail(n) for n in range(n_max_for_sum + 1, len(d.table)))
        return WorkEstimate(partial_sum, rest, False)
    ratio = 2.0 ** (1.0 - d.exponent)
    if ratio >= 1.0:
        logger.warning(f"Expected work diverges for tail {d.label} (term ratio {ratio:g} >= 1)")
        return WorkEstimate(partial_sum, math.inf, True)
    next_term = 2.0 ** (n_max_for_sum + 1) * d.tail(n_max_for_sum + 1)
    return WorkEstimate(partial_sum, next_term / (1.0 - ratio), False)

def coupled_sum_sample(p: HestonParams, m: RateModel, payoff: Payoff, d: LevelDistribution, seed: int,
                       block_index: int = 0, n_paths: int = 1, levels: Optional[np.ndarray] = None,
                       max_level: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Z = sum_{n=0}^{N} (Y_n - Y_{n-1}) / P(N >= n) for a block of samples.

    Each level draws from its own streams, so the differences of one sample are
    independent across levels. ``levels`` overrides the randomized N.
    """
    if levels is None:
        levels = sample_level(d, RngStream.for_role(seed, block_index, StreamRole.LEVEL), n_paths)
    levels = np.asarray(levels, dtype=np.int64)
    if max_level is not None:
        levels = np.minimum(levels, max_level)

    z = np.zeros(n_paths)
    work = np.zeros(n_paths)
    top = int(levels.max()) if levels.size else -1
    for n in range(top + 1):
        active = levels >= n
        count = int(np.count_nonzero(active))
        if count == 0:
            continue
        tail = d.tail(n)
        if tail <= 0.0:
            raise ParameterError(f"Level {n} drawn with zero tail probability")
        draw = coupled_level_draw(p, m, payoff, n, PathStreams(seed, block_index, n), count)
        z[active] += draw.delta / tail
        work[active] += draw.work
    return z, work

def standard_sample(p: HestonParams, m: RateModel, payoff: Payoff, level: int, seed: int,
                    block_index: int = 0, n_paths: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    y = fine_level_draw(p, m, payoff, level, PathStreams(seed, block_index, level), n_paths)
    return y, np.full(n_paths, float(2 ** level))

@dataclass
class BlockSummary:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    work: float = 0.0

    @classmethod
    def from_values(cls, values: np.ndarray, work: np.ndarray) -> 'BlockSummary':
        values = np.asarray(values, dtype=float)
        mean = float(np.mean(values)) if values.size else 0.0
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)), float(np.sum(work)))

    def merge(self, other: 'BlockSummary') -> 'BlockSummary':
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return BlockSummary(count, mean, m2, self.work + other.work)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else 0.0

def pairwise_reduce(summaries: Sequence[BlockSummary]) -> BlockSummary:
    if not summaries:
        return BlockSummary()
    if len(summaries) == 1:
        return summaries[0]
    mid = len(summaries) // 2
    return pairwise_reduce(summaries[:mid]).merge(pairwise_reduce(summaries[mid:]))

def _summarize_block(kernel: BlockKernel, block_index: int, n_paths: int) -> BlockSummary:
    values, work = kernel(block_index, n_paths)
    return BlockSummary.from_values(values, work)

def block_layout(n_samples: int, block_size: int) -> List[Tuple[int, int]]:
    if block_size < 1:
        raise ParameterError(f"Block size must be positive, got {block_size}")
    n_blocks = -(-n_samples // block_size)
    return [(b, min(block_size, n_samples - b * block_size)) for b in range(n_blocks)]

async def run_blocks_async(kernel: BlockKernel, n_samples: int, workers: int = 1,
                           block_size: int = DEFAULT_BLOCK_SIZE) -> BlockSummary:
    """Evaluate ``kernel`` over all blocks and merge the summaries in block order."""
    layout = block_layout(n_samples, block_size)
    loop = asyncio.get_running_loop()
    if workers <= 1 or len(layout) == 1:
        # one block at a time on the default thread pool keeps the event loop responsive
        summaries = [await loop.run_in_executor(None, _summarize_block, kernel, b, size) for b, size in layout]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = await asyncio.gather(*[
                loop.run_in_executor(pool, _summarize_block, kernel, b, size) for b, size in layout
            ])
    return pairwise_reduce(list(summaries))

def estimator_kernel(kind: EstimatorKind, p: HestonParams, m: RateModel, payoff: Payoff,
                     d: LevelDistribution, seed: int, max_level: Optional[int] = None) -> BlockKernel:
    if isinstance(kind, Standard):
        return partial(_standard_kernel, p, m, payoff, kind.level, seed)
    return partial(_coupled_sum_kernel, p, m, payoff, d, seed, max_level)

def _standard_kernel(p, m, payoff, level, seed, block_index, n_paths):
    return standard_sample(p, m, payoff, level, seed, block_index, n_paths)

def _coupled_sum_kernel(p, m, payoff, d, seed, max_level, block_index, n_paths):
    return coupled_sum_sample(p, m, payoff, d, seed, block_index, n_paths, max_level=max_level)

async def run_estimator_async(kind: EstimatorKind, p: HestonParams, m: RateModel, payoff: Payoff,
                              d: LevelDistribution, n_samples: int, seed: int, workers: int = 1,
                              block_size: int = DEFAULT_BLOCK_SIZE,
                              max_level: Optional[int] = None) -> EstimatorReport:
    if n_samples < 2:
        raise ParameterError(f"Need at least two samples, got {n_samples}")
    if max_level is not None and isinstance(kind, CoupledSum):
        logger.warning(f"Level cap {max_level} is active: the coupled-sum estimate is biased")

    started = time.perf_counter()
    summary = await run_blocks_async(estimator_kernel(kind, p, m, payoff, d, seed, max_level),
                                     n_samples, workers, block_size)
    elapsed = time.perf_counter() - started

    report = EstimatorReport(
        mean=summary.mean,
        std_error=summary.std_error,
        n_samples=summary.count,
        avg_work_units=summary.work / summary.count,
        elapsed_seconds=elapsed,
        label=kind.label,
    )
    logger.debug(f"{kind.label} {payoff.label} on {m.label}: mean={report.mean:.8g} "
                 f"se={report.std_error:.3g} work={report.avg_work_units:.4g} ({elapsed:.2f}s)")
    return report

def run_estimator(kind: EstimatorKind, p: HestonParams, m: RateModel, payoff: Payoff, d: LevelDistribution,
                  n_samples: int, seed: int, workers: int = 1, block_size: int = DEFAULT_BLOCK_SIZE,
                  max_level: Optional[int] = None) -> EstimatorReport:
    return asyncio.run(run_estimator_async(kind, p, m, payoff, d, n_samples, seed, workers, block_size,
                                           max_level))
