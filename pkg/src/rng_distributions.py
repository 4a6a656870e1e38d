"""
Seedable, stream-splittable sampling of the transition laws used by the engine.

Every stream is addressed by ``(seed, (block_index, role, level))`` and backed by
a Philox counter-based generator, so any block of samples can be regenerated
bit-exactly on any worker without coordination.
"""

import logging
import zlib
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ParameterError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Size = Optional[Union[int, Tuple[int, ...]]]


class StreamRole(IntEnum):
    """Independent randomness sources of one sample."""

    VARIANCE = 0
    RATE = 1
    TERMINAL_GAUSSIAN = 2
    LEVEL = 3


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream for one (seed, block, role, level) address."""

    seed: int
    stream_key: Tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ParameterError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if any(int(k) < 0 for k in self.stream_key):
            raise ParameterError(f"Stream key components must be nonnegative: {self.stream_key}")

    @classmethod
    def for_role(cls, seed: int, block_index: int, role: StreamRole, level: int = 0) -> 'RngStream':
        return cls(seed, (int(block_index), int(role), int(level)))

    @cached_property
    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=int(self.seed), spawn_key=tuple(int(k) for k in self.stream_key))
        return np.random.Generator(np.random.Philox(sequence))


@dataclass(frozen=True)
class PathStreams:
    """The per-role streams a block of paths consumes at one level."""

    seed: int
    block_index: int = 0
    level: int = 0

    @cached_property
    def variance(self) -> RngStream:
        return RngStream.for_role(self.seed, self.block_index, StreamRole.VARIANCE, self.level)

    @cached_property
    def rate(self) -> RngStream:
        return RngStream.for_role(self.seed, self.block_index, StreamRole.RATE, self.level)

    @cached_property
    def terminal_gaussian(self) -> RngStream:
        return RngStream.for_role(self.seed, self.block_index, StreamRole.TERMINAL_GAUSSIAN, self.level)


def derive_seed(seed: int, label: str) -> int:
    """Derive an independent 64-bit seed for a named sub-experiment."""
    sequence = np.random.SeedSequence([int(seed), zlib.crc32(label.encode('utf-8'))])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_uniform(rng: RngStream, size: Size = None) -> np.ndarray:
    return rng.generator.random(size)


def sample_normal(rng: RngStream, size: Size = None) -> np.ndarray:
    return rng.generator.standard_normal(size)


def sample_poisson(mean: ArrayLike, rng: RngStream, size: Size = None) -> np.ndarray:
    """Exact Poisson draw.

    numpy's generator switches between a product-of-uniforms search for small
    means and transformed rejection (PTRS) for means of 10 and above.
    """
    mean = np.asarray(mean, dtype=float)
    if not np.all(np.isfinite(mean)) or np.any(mean < 0):
        raise ParameterError("Poisson mean must be finite and nonnegative")
    return rng.generator.poisson(mean, size)


def sample_gamma(shape: ArrayLike, scale: ArrayLike, rng: RngStream, size: Size = None) -> np.ndarray:
    """Exact Gamma(shape, scale) draw (Marsaglia-Tsang squeeze, boosted below shape 1)."""
    shape = np.asarray(shape, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if np.any(~(shape > 0)) or np.any(~(scale > 0)):
        raise ParameterError("Gamma shape and scale must be positive")
    return rng.generator.gamma(shape, scale, size)


class NcChiSqMethod(str, Enum):
    AUTO = 'auto'
    DECOMPOSITION = 'decomposition'
    POISSON_MIXTURE = 'poisson_mixture'


@dataclass(frozen=True, eq=False)
class NcChiSqParams:
    """Degrees of freedom ``d`` and noncentrality ``lambda`` (scalar or per path)."""

    dof: float
    noncentrality: ArrayLike = 0.0
    _lam: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.dof) and self.dof > 0):
            raise ParameterError(f"Noncentral chi-squared dof must be positive, got {self.dof}")
        lam = np.asarray(self.noncentrality, dtype=float)
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise ParameterError("Noncentrality must be finite and nonnegative")
        object.__setattr__(self, '_lam', lam)

    @property
    def mean(self) -> np.ndarray:
        return self.dof + self._lam

    @property
    def variance(self) -> np.ndarray:
        return 2.0 * (self.dof + 2.0 * self._lam)


def sample_ncx2(p: NcChiSqParams, rng: RngStream, size: Size = None,
                method: NcChiSqMethod = NcChiSqMethod.AUTO) -> np.ndarray:
    """Exact draw from the noncentral chi-squared law.

    d > 1: (Z + sqrt(lambda))^2 + chi2_{d-1}.
    d <= 1: J ~ Poisson(lambda / 2), then central chi2_{d + 2J}.
    ``method`` forces one branch regardless of ``d``.
    """
    method = NcChiSqMethod(method)
    lam = p._lam if size is None else np.broadcast_to(p._lam, size)
    shape = lam.shape

    if method is NcChiSqMethod.AUTO:
        method = NcChiSqMethod.DECOMPOSITION if p.dof > 1.0 else NcChiSqMethod.POISSON_MIXTURE

    if method is NcChiSqMethod.DECOMPOSITION:
        if p.dof < 1.0:
            raise ParameterError(f"Decomposition needs at least one Gaussian dof, got d={p.dof}")
        z = sample_normal(rng, shape)
        draw = (z + np.sqrt(lam)) ** 2
        if p.dof > 1.0:
            draw = draw + sample_gamma(0.5 * (p.dof - 1.0), 2.0, rng, shape)
        return draw

    j = sample_poisson(0.5 * lam, rng)
    return sample_gamma(0.5 * p.dof + j, 2.0, rng)
