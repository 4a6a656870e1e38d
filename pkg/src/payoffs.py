"""
Payoffs and their discounted evaluation.

Digital options are never priced through the raw indicator: the Gaussian
driving the terminal log-price is integrated out and the conditional value
e^{-rate_sum} * Phi(+-A) is used instead.
"""

import logging
import math
from abc import ABC
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.special import ndtr

from .errors import ConfigurationError, ParameterError, UnsupportedConfigurationError
from .log_euler import TerminalInputs, log_euler_terminal
from .rng_distributions import ArrayLike
from .variance_process import HestonParams

logger = logging.getLogger(__name__)


class Payoff(ABC):
    kind: ClassVar[str]
    # priced through the conditional expectation instead of S_T
    conditional: ClassVar[bool] = False

    @property
    def label(self) -> str:
        return self.kind

    def value(self, s_terminal: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.kind} has no pathwise value")

    def to_dict(self) -> dict:
        return {'type': self.kind}


@dataclass(frozen=True)
class StrikePayoff(Payoff):
    strike: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.strike) and self.strike > 0):
            raise ConfigurationError(f"Strike must be positive, got {self.strike}")

    @property
    def label(self) -> str:
        return f"{self.kind}_k{self.strike:g}"

    def to_dict(self) -> dict:
        return {'type': self.kind, 'strike': self.strike}


@dataclass(frozen=True)
class Put(StrikePayoff):
    kind: ClassVar[str] = 'put'

    def value(self, s_terminal):
        return np.maximum(self.strike - s_terminal, 0.0)


@dataclass(frozen=True)
class Call(StrikePayoff):
    kind: ClassVar[str] = 'call'

    def value(self, s_terminal):
        return np.maximum(s_terminal - self.strike, 0.0)


@dataclass(frozen=True)
class DigitalCall(StrikePayoff):
    kind: ClassVar[str] = 'digital_call'
    conditional: ClassVar[bool] = True
    sign: ClassVar[float] = 1.0


@dataclass(frozen=True)
class DigitalPut(StrikePayoff):
    kind: ClassVar[str] = 'digital_put'
    conditional: ClassVar[bool] = True
    sign: ClassVar[float] = -1.0


@dataclass(frozen=True)
class Bond(Payoff):
    """Pays one unit at T; its discounted value is the discount factor."""

    kind: ClassVar[str] = 'bond'

    def value(self, s_terminal):
        return np.ones_like(s_terminal)


@dataclass(frozen=True)
class Asset(Payoff):
    """Delivers the asset at T; the discounted value is a martingale started at S0."""

    kind: ClassVar[str] = 'asset'

    def value(self, s_terminal):
        return s_terminal


PAYOFF_TYPES = {cls.kind: cls for cls in (Put, Call, DigitalCall, DigitalPut, Bond, Asset)}
# experiment documents may say 'digital' for the digital call
PAYOFF_ALIASES = {'digital': 'digital_call'}


def payoff_from_dict(data: dict) -> Payoff:
    try:
        kind = str(data['type']).lower()
        kind = PAYOFF_ALIASES.get(kind, kind)
        cls = PAYOFF_TYPES[kind]
    except KeyError as e:
        raise ConfigurationError(f"Unknown or missing payoff type in {data!r}") from e
    if issubclass(cls, StrikePayoff):
        try:
            return cls(strike=float(data.get('strike', 1.0)))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid strike in {data!r}") from e
    return cls()


@dataclass
class GInputs:
    v_terminal: ArrayLike
    var_sum: ArrayLike
    rate_sum: ArrayLike

    def __post_init__(self):
        if np.any(~(np.asarray(self.var_sum) > 0)):
            raise ParameterError("Integrated variance must be positive")


def vanilla_value(payoff: Payoff, s_terminal: ArrayLike) -> np.ndarray:
    s_terminal = np.asarray(s_terminal, dtype=float)
    if np.any(~(s_terminal > 0)):
        raise ParameterError("Terminal asset price must be positive")
    return payoff.value(s_terminal)


def digital_conditional_value(p: HestonParams, payoff: StrikePayoff, g_in: GInputs) -> np.ndarray:
    if abs(p.rho) >= 1.0:
        raise UnsupportedConfigurationError("Conditional digital pricing needs |rho| < 1")
    var_sum = np.asarray(g_in.var_sum, dtype=float)
    rate_sum = np.asarray(g_in.rate_sum, dtype=float)
    numerator = (math.log(p.s0) - math.log(payoff.strike) + rate_sum
                 + (p.rho * p.k / p.sigma - 0.5) * var_sum
                 + (p.rho / p.sigma) * (np.asarray(g_in.v_terminal, dtype=float) - p.v0 - p.k * p.theta * p.t))
    a = numerator / (math.sqrt(1.0 - p.rho ** 2) * np.sqrt(var_sum))
    # ndtr evaluates the lower tail through erfc, so Phi(-A) keeps full accuracy
    return np.exp(-rate_sum) * ndtr(payoff.sign * a)


def discounted_payoff(p: HestonParams, payoff: Payoff, t: TerminalInputs) -> np.ndarray:
    if payoff.conditional:
        return digital_conditional_value(p, payoff, GInputs(t.v_terminal, t.var_sum, t.rate_sum))
    s_terminal = np.exp(log_euler_terminal(p, t))
    return np.exp(-np.asarray(t.rate_sum, dtype=float)) * payoff.value(s_terminal)
