"""
Exact simulation of the Heston variance on a dyadic grid.

Paths are advanced with the scaled noncentral chi-squared transition and only
the running left-endpoint sums are kept, so memory does not grow with the
number of steps.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, ParameterError
from .grid import check_dyadic, coarse_is_fine
from .rng_distributions import ArrayLike, NcChiSqParams, RngStream, Size, sample_ncx2

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HestonParams:
    """Equity/variance block of the model and the pricing horizon."""

    k: float
    theta: float
    sigma: float
    rho: float
    s0: float
    v0: float
    t: float = 1.0

    def __post_init__(self):
        for name in ('k', 'theta', 'sigma', 's0', 'v0', 't'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"Heston parameter {name} must be positive, got {value}")
        if not -1.0 <= self.rho <= 1.0:
            raise ConfigurationError(f"Heston correlation must lie in [-1, 1], got {self.rho}")

    @property
    def feller_index(self) -> float:
        return 2.0 * self.k * self.theta / self.sigma ** 2

    @property
    def dof(self) -> float:
        return 4.0 * self.k * self.theta / self.sigma ** 2

    def transition_constants(self, dt: float):
        """Return (scale, noncentrality factor) of the exact transition over ``dt``."""
        decay = math.exp(-self.k * dt)
        scale = self.sigma ** 2 * (1.0 - decay) / (4.0 * self.k)
        return scale, decay / scale

    def mean_variance(self, dt: float, v_from: float) -> float:
        return self.theta + (v_from - self.theta) * math.exp(-self.k * dt)

    def integrated_mean_variance(self) -> float:
        """Closed form of the integral of E[V_t] over [0, T]."""
        return self.theta * self.t + (self.v0 - self.theta) * (1.0 - math.exp(-self.k * self.t)) / self.k


@dataclass
class VarianceDraw:
    v_terminal: np.ndarray
    fine_integral: np.ndarray
    coarse_integral: np.ndarray
    path: Optional[np.ndarray] = None


def variance_transition(params: HestonParams, v_from: ArrayLike, dt: float, rng: RngStream,
                        size: Size = None) -> np.ndarray:
    if not dt > 0:
        raise ParameterError(f"Transition step must be positive, got dt={dt}")
    v_from = np.asarray(v_from, dtype=float)
    if np.any(v_from < 0):
        raise ParameterError("Variance state must be nonnegative")
    scale, factor = params.transition_constants(dt)
    return scale * sample_ncx2(NcChiSqParams(params.dof, factor * v_from), rng, size)


def simulate_variance(params: HestonParams, n_steps: int, rng: RngStream, n_paths: int = 1,
                      coarse_stride: int = 2, record_path: bool = False) -> VarianceDraw:
    """Chain exact transitions over ``n_steps`` and accumulate the Riemann sums.

    The fine sum uses every left endpoint (indices 0..n_steps-1, V0 included);
    the coarse sum uses the indices that are multiples of ``coarse_stride`` with
    weight ``coarse_stride * h``.
    """
    check_dyadic(n_steps)
    collapsed = coarse_is_fine(n_steps, coarse_stride)
    h = params.t / n_steps
    scale, factor = params.transition_constants(h)

    v = np.full(n_paths, params.v0)
    fine_acc = np.zeros(n_paths)
    coarse_acc = np.zeros(n_paths)
    path = [v] if record_path else None

    for i in range(n_steps):
        fine_acc += v
        if not collapsed and i % coarse_stride == 0:
            coarse_acc += v
        v = scale * sample_ncx2(NcChiSqParams(params.dof, factor * v), rng)
        if record_path:
            path.append(v)

    fine = h * fine_acc
    coarse = fine.copy() if collapsed else (coarse_stride * h) * coarse_acc
    return VarianceDraw(
        v_terminal=v,
        fine_integral=fine,
        coarse_integral=coarse,
        path=np.vstack(path) if record_path else None,
    )
