"""
Coupled fine/coarse discounted payoffs of the semi-exact log-Euler scheme.

Both branches of one draw reuse the same exact variance values at shared grid
points, the same rate randomness and the same terminal Gaussian; only the
Riemann sums differ.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ParameterError
from .grid import level_steps
from .log_euler import TerminalInputs, log_euler_terminal
from .payoffs import Payoff, discounted_payoff
from .rate_models import RateModel, simulate_rate
from .rng_distributions import PathStreams, sample_normal
from .variance_process import HestonParams, simulate_variance

__all__ = ['TerminalInputs', 'log_euler_terminal', 'CoupledDraw', 'coupled_level_draw', 'fine_level_draw',
           'reference_pair_draw']

logger = logging.getLogger(__name__)


@dataclass
class CoupledDraw:
    y_fine: np.ndarray
    y_coarse: np.ndarray
    level: int

    @property
    def delta(self) -> np.ndarray:
        return self.y_fine - self.y_coarse

    @property
    def work(self) -> int:
        return 2 ** self.level


def _paired_payoffs(p: HestonParams, m: RateModel, payoff: Payoff, n_steps: int, coarse_stride: int,
                    streams: PathStreams, n_paths: int):
    variance = simulate_variance(p, n_steps, streams.variance, n_paths, coarse_stride)
    rate = simulate_rate(m, n_steps, p.t, streams.rate, n_paths, coarse_stride)
    gaussian = sample_normal(streams.terminal_gaussian, n_paths)

    y_fine = discounted_payoff(p, payoff, TerminalInputs(
        rate.fine_discount_sum, variance.fine_integral, variance.v_terminal, gaussian))
    y_coarse = discounted_payoff(p, payoff, TerminalInputs(
        rate.coarse_discount_sum, variance.coarse_integral, variance.v_terminal, gaussian))
    return y_fine, y_coarse


def coupled_level_draw(p: HestonParams, m: RateModel, payoff: Payoff, level: int, streams: PathStreams,
                       n_paths: int = 1) -> CoupledDraw:
    """Y at step T/2^level and, from the same randomness, Y at step T/2^(level-1).

    Level 0 has no coarser partner and returns y_coarse = 0.
    """
    n_steps = level_steps(level)
    y_fine, y_coarse = _paired_payoffs(p, m, payoff, n_steps, 2, streams, n_paths)
    if level == 0:
        y_coarse = np.zeros_like(y_fine)
    return CoupledDraw(y_fine, y_coarse, level)


def fine_level_draw(p: HestonParams, m: RateModel, payoff: Payoff, level: int, streams: PathStreams,
                    n_paths: int = 1) -> np.ndarray:
    """Y at step T/2^level alone; consumes the same randomness as ``coupled_level_draw``."""
    n_steps = level_steps(level)
    variance = simulate_variance(p, n_steps, streams.variance, n_paths, coarse_stride=1)
    rate = simulate_rate(m, n_steps, p.t, streams.rate, n_paths, coarse_stride=1)
    gaussian = sample_normal(streams.terminal_gaussian, n_paths)
    return discounted_payoff(p, payoff, TerminalInputs(
        rate.fine_discount_sum, variance.fine_integral, variance.v_terminal, gaussian))


def reference_pair_draw(p: HestonParams, m: RateModel, payoff: Payoff, n_coarse: int, n_ref: int,
                        streams: PathStreams, n_paths: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Y at level ``n_coarse`` paired with a fine reference at level ``n_ref``.

    One pass at 2^n_ref steps; the coarse sums use every 2^(n_ref - n_coarse)-th
    grid point (or, for discretized rate schemes, the scheme run on summed
    increments).
    """
    if n_ref < n_coarse:
        raise ParameterError(f"Reference level {n_ref} is coarser than level {n_coarse}")
    level_steps(n_coarse)
    y_ref, y_coarse = _paired_payoffs(p, m, payoff, level_steps(n_ref), 2 ** (n_ref - n_coarse),
                                      streams, n_paths)
    return y_coarse, y_ref
