"""Semi-exact log-Euler terminal log-price."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .rng_distributions import ArrayLike
from .variance_process import HestonParams


@dataclass
class TerminalInputs:
    """Path functionals entering the terminal log-price.

    rate_sum: sum of r_ih * h; var_sum: sum of V_ih * h; v_terminal: V_T;
    gaussian: the standard normal shared by fine and coarse branches.
    """

    rate_sum: ArrayLike
    var_sum: ArrayLike
    v_terminal: ArrayLike
    gaussian: ArrayLike = 0.0

    def __post_init__(self):
        if np.any(~(np.asarray(self.var_sum) > 0)):
            raise ParameterError("Integrated variance must be positive")


def log_euler_terminal(p: HestonParams, t: TerminalInputs) -> np.ndarray:
    var_sum = np.asarray(t.var_sum, dtype=float)
    return (math.log(p.s0)
            + np.asarray(t.rate_sum, dtype=float)
            + (p.rho * p.k / p.sigma - 0.5) * var_sum
            + (p.rho / p.sigma) * (np.asarray(t.v_terminal, dtype=float) - p.v0 - p.k * p.theta * p.t)
            + math.sqrt(max(0.0, 1.0 - p.rho ** 2)) * np.sqrt(var_sum) * np.asarray(t.gaussian, dtype=float))
