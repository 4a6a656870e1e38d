"""
Short-rate simulation on the dyadic grid.

CIR (exact, backward Euler on sqrt(r), drift-implicit Milstein), Hull-White and
Black-Karasinski. Every simulator streams left-endpoint discount sums on the
fine grid and on a coarser subgrid; exact models subsample one path, the
discretized CIR schemes run a second coarse recursion on summed increments.
"""

import logging
import math
from abc import ABC, abstractmethod
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, List, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, Diagnostic, InternalInvariantError, ParameterError
from .grid import check_dyadic, coarse_is_fine
from .rng_distributions import ArrayLike, NcChiSqParams, RngStream, Size, sample_ncx2, sample_normal

logger = logging.getLogger(__name__)


class CIRScheme(str, Enum):
    EXACT = 'exact'
    BEM = 'bem'
    DRIFT_IMPLICIT_MILSTEIN = 'milstein'


@dataclass(frozen=True)
class PiecewiseConstant:
    """Nonnegative step function of time; segment j starts at ``starts[j]``."""

    starts: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if not self.starts or len(self.starts) != len(self.values):
            raise ConfigurationError("Piecewise-constant function needs matching starts and values")
        if self.starts[0] != 0.0:
            raise ConfigurationError("First segment must start at t=0")
        if any(b <= a for a, b in zip(self.starts, self.starts[1:])):
            raise ConfigurationError("Segment starts must be strictly increasing")
        if any(not (math.isfinite(v) and v >= 0) for v in self.values):
            raise ConfigurationError("Segment values must be finite and nonnegative")

    @classmethod
    def constant(cls, value: float) -> 'PiecewiseConstant':
        return cls((0.0,), (float(value),))

    @classmethod
    def from_segments(cls, segments: Sequence[Sequence[float]]) -> 'PiecewiseConstant':
        pairs = [(float(start), float(value)) for start, value in segments]
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __call__(self, t: float) -> float:
        return self.values[bisect_right(self.starts, t) - 1]

    def exp_weighted_integral(self, t0: float, t1: float, alpha: float) -> float:
        """Integral of exp(-alpha (t1 - s)) beta(s) over [t0, t1], split at breakpoints."""
        total = 0.0
        ends = self.starts[1:] + (math.inf,)
        for start, end, value in zip(self.starts, ends, self.values):
            a, b = max(t0, start), min(t1, end)
            if b <= a or value == 0.0:
                continue
            total += value * (math.exp(-alpha * (t1 - b)) - math.exp(-alpha * (t1 - a))) / alpha
        return total

    def to_segments(self) -> List[List[float]]:
        return [[s, v] for s, v in zip(self.starts, self.values)]


@dataclass
class RateDraw:
    fine_discount_sum: np.ndarray
    coarse_discount_sum: np.ndarray
    r_terminal: np.ndarray
    coarse_r_terminal: np.ndarray
    # max over coarse grid points of |fine - coarse|; zero for exact models
    max_coarse_gap: np.ndarray


class RateModel(ABC):
    kind: ClassVar[str]

    @abstractmethod
    def simulate(self, n_steps: int, horizon: float, rng: RngStream, n_paths: int = 1,
                 coarse_stride: int = 2) -> RateDraw:
        """Simulate ``n_paths`` paths on ``n_steps`` steps over [0, horizon]."""

    def diagnostics(self) -> List[Diagnostic]:
        return []

    @property
    def label(self) -> str:
        return self.kind

    @abstractmethod
    def to_dict(self) -> dict:
        """Experiment-document representation."""


class _ExactTransitionModel(RateModel):
    """Models whose grid transitions are sampled from the exact law."""

    def _initial_state(self, n_paths: int) -> np.ndarray:
        return np.full(n_paths, float(self.r0))

    def _rate_of(self, state: np.ndarray) -> np.ndarray:
        return state

    @abstractmethod
    def _advance(self, state: np.ndarray, t_from: float, dt: float, rng: RngStream) -> np.ndarray:
        """One exact transition of the internal state."""

    def simulate(self, n_steps, horizon, rng, n_paths=1, coarse_stride=2):
        check_dyadic(n_steps)
        collapsed = coarse_is_fine(n_steps, coarse_stride)
        h = horizon / n_steps

        state = self._initial_state(n_paths)
        fine_acc = np.zeros(n_paths)
        coarse_acc = np.zeros(n_paths)
        for i in range(n_steps):
            r = self._rate_of(state)
            fine_acc += r
            if not collapsed and i % coarse_stride == 0:
                coarse_acc += r
            state = self._advance(state, i * h, h, rng)

        r_terminal = self._rate_of(state)
        fine = h * fine_acc
        coarse = fine.copy() if collapsed else (coarse_stride * h) * coarse_acc
        return RateDraw(fine, coarse, r_terminal, r_terminal, np.zeros(n_paths))


@dataclass(frozen=True)
class CIRRateModel(_ExactTransitionModel):
    """dr = alpha (beta - r) dt + gamma sqrt(r) dW."""

    alpha: float
    beta: float
    gamma: float
    r0: float
    scheme: CIRScheme = CIRScheme.EXACT
    kind: ClassVar[str] = 'cir'

    def __post_init__(self):
        object.__setattr__(self, 'scheme', CIRScheme(self.scheme))
        for name in ('alpha', 'beta', 'gamma', 'r0'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"CIR parameter {name} must be positive, got {value}")
        if self.scheme is CIRScheme.BEM and self.bem_root_constant < 0:
            raise ConfigurationError(
                f"BEM needs beta - gamma^2/(4 alpha) >= 0, got {self.bem_root_constant:.6g}")

    @property
    def label(self) -> str:
        return f"cir-{self.scheme.value}"

    @property
    def dof(self) -> float:
        return 4.0 * self.alpha * self.beta / self.gamma ** 2

    @property
    def feller_index(self) -> float:
        return 2.0 * self.alpha * self.beta / self.gamma ** 2

    @property
    def bem_root_constant(self) -> float:
        return self.beta - self.gamma ** 2 / (4.0 * self.alpha)

    def transition_constants(self, dt: float):
        decay = math.exp(-self.alpha * dt)
        scale = self.gamma ** 2 * (1.0 - decay) / (4.0 * self.alpha)
        return scale, decay / scale

    def mean_rate(self, dt: float, r_from: float) -> float:
        return r_from * math.exp(-self.alpha * dt) + self.beta * (1.0 - math.exp(-self.alpha * dt))

    def diagnostics(self) -> List[Diagnostic]:
        found = []
        if self.scheme is CIRScheme.BEM and self.feller_index <= 3.0:
            found.append(Diagnostic(
                'warning', 'bem_order',
                f"2*alpha*beta/gamma^2 = {self.feller_index:.4g} <= 3: BEM order-one strong convergence not guaranteed"))
        if self.scheme is CIRScheme.DRIFT_IMPLICIT_MILSTEIN and self.alpha * self.beta < self.gamma ** 2 / 4.0:
            found.append(Diagnostic(
                'warning', 'milstein_positivity',
                f"alpha*beta = {self.alpha * self.beta:.4g} < gamma^2/4: Milstein nonnegativity not guaranteed"))
        return found

    def _advance(self, state, t_from, dt, rng):
        return cir_exact_transition(self, state, dt, rng)

    def simulate(self, n_steps, horizon, rng, n_paths=1, coarse_stride=2):
        if self.scheme is CIRScheme.EXACT:
            return super().simulate(n_steps, horizon, rng, n_paths, coarse_stride)
        return _simulate_discretized(self, n_steps, horizon, rng, n_paths, coarse_stride)

    def to_dict(self) -> dict:
        return {'type': 'cir', 'alpha': self.alpha, 'beta': self.beta, 'gamma': self.gamma,
                'r0': self.r0, 'scheme': self.scheme.value}


@dataclass(frozen=True)
class HullWhiteRateModel(_ExactTransitionModel):
    """dr = alpha (beta(t) - r) dt + gamma dW."""

    alpha: float
    beta_fn: PiecewiseConstant
    gamma: float
    r0: float
    kind: ClassVar[str] = 'hw'

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigurationError(f"Hull-White alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigurationError(f"Hull-White gamma must be nonnegative, got {self.gamma}")
        if not math.isfinite(self.r0):
            raise ConfigurationError("Hull-White r0 must be finite")

    def moments(self, r_from: ArrayLike, t_from: float, dt: float):
        decay = math.exp(-self.alpha * dt)
        mean = decay * np.asarray(r_from, dtype=float) \
            + self.alpha * self.beta_fn.exp_weighted_integral(t_from, t_from + dt, self.alpha)
        var = self.gamma ** 2 * (1.0 - math.exp(-2.0 * self.alpha * dt)) / (2.0 * self.alpha)
        return mean, var

    def _advance(self, state, t_from, dt, rng):
        return hw_transition(self, state, t_from, dt, rng)

    def to_dict(self) -> dict:
        return {'type': 'hw', 'alpha': self.alpha, 'beta_segments': self.beta_fn.to_segments(),
                'gamma': self.gamma, 'r0': self.r0}


@dataclass(frozen=True)
class BlackKarasinskiRateModel(_ExactTransitionModel):
    """d ln r = (beta(t) - alpha ln r) dt + gamma dW; the state is ln r."""

    alpha: float
    beta_fn: PiecewiseConstant
    gamma: float
    r0: float
    kind: ClassVar[str] = 'bk'

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigurationError(f"Black-Karasinski alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigurationError(f"Black-Karasinski gamma must be nonnegative, got {self.gamma}")
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise ConfigurationError(f"Black-Karasinski r0 must be positive, got {self.r0}")

    def log_moments(self, log_r_from: ArrayLike, t_from: float, dt: float):
        decay = math.exp(-self.alpha * dt)
        mean = decay * np.asarray(log_r_from, dtype=float) \
            + self.beta_fn.exp_weighted_integral(t_from, t_from + dt, self.alpha)
        var = self.gamma ** 2 * (1.0 - math.exp(-2.0 * self.alpha * dt)) / (2.0 * self.alpha)
        return mean, var

    def _initial_state(self, n_paths):
        return np.full(n_paths, math.log(self.r0))

    def _rate_of(self, state):
        return np.exp(state)

    def _advance(self, state, t_from, dt, rng):
        mean, var = self.log_moments(state, t_from, dt)
        return mean + math.sqrt(var) * sample_normal(rng, np.shape(state))

    def to_dict(self) -> dict:
        return {'type': 'bk', 'alpha': self.alpha, 'beta_segments': self.beta_fn.to_segments(),
                'gamma': self.gamma, 'r0': self.r0}


def cir_exact_transition(m: CIRRateModel, r_from: ArrayLike, dt: float, rng: RngStream,
                         size: Size = None) -> np.ndarray:
    if not dt > 0:
        raise ParameterError(f"Transition step must be positive, got dt={dt}")
    r_from = np.asarray(r_from, dtype=float)
    if np.any(r_from < 0):
        raise ParameterError("CIR state must be nonnegative")
    scale, factor = m.transition_constants(dt)
    return scale * sample_ncx2(NcChiSqParams(m.dof, factor * r_from), rng, size)


def bem_step(m: CIRRateModel, x_prev: ArrayLike, dW: ArrayLike, h: float):
    """Backward Euler step on x = sqrt(r): positive root of the implicit quadratic."""
    a = 1.0 + 0.5 * m.alpha * h
    b = np.asarray(x_prev, dtype=float) + 0.5 * m.gamma * np.asarray(dW, dtype=float)
    c = 0.5 * m.alpha * h * m.bem_root_constant
    x_next = (b + np.sqrt(b * b + 4.0 * a * c)) / (2.0 * a)
    return x_next, x_next * x_next


def milstein_step(m: CIRRateModel, r_prev: ArrayLike, dW: ArrayLike, h: float) -> np.ndarray:
    r_prev = np.asarray(r_prev, dtype=float)
    if np.any(r_prev < 0):
        raise InternalInvariantError("Drift-implicit Milstein state went negative")
    dW = np.asarray(dW, dtype=float)
    numerator = r_prev + m.alpha * m.beta * h + m.gamma * np.sqrt(r_prev) * dW \
        + 0.25 * m.gamma ** 2 * (dW * dW - h)
    return numerator / (1.0 + m.alpha * h)


def hw_transition(m: HullWhiteRateModel, r_from: ArrayLike, t_from: float, dt: float,
                  rng: RngStream, size: Size = None) -> np.ndarray:
    if not dt > 0:
        raise ParameterError(f"Transition step must be positive, got dt={dt}")
    mean, var = m.moments(r_from, t_from, dt)
    shape = size if size is not None else np.shape(mean)
    return mean + math.sqrt(var) * sample_normal(rng, shape)


def bk_transition(m: BlackKarasinskiRateModel, r_from: ArrayLike, t_from: float, dt: float,
                  rng: RngStream, size: Size = None) -> np.ndarray:
    if not dt > 0:
        raise ParameterError(f"Transition step must be positive, got dt={dt}")
    r_from = np.asarray(r_from, dtype=float)
    if np.any(r_from <= 0):
        raise ParameterError("Black-Karasinski rate must be positive")
    mean, var = m.log_moments(np.log(r_from), t_from, dt)
    shape = size if size is not None else np.shape(mean)
    return np.exp(mean + math.sqrt(var) * sample_normal(rng, shape))


def _simulate_discretized(m: CIRRateModel, n_steps: int, horizon: float, rng: RngStream,
                          n_paths: int, coarse_stride: int) -> RateDraw:
    """Run BEM or Milstein on the fine grid and, on summed increments, on the coarse one.

    Each fine step draws ``standard_normal(n_paths) * sqrt(h)`` from ``rng``.
    """
    check_dyadic(n_steps)
    collapsed = coarse_is_fine(n_steps, coarse_stride)
    h = horizon / n_steps
    sqrt_h = math.sqrt(h)
    bem = m.scheme is CIRScheme.BEM

    if bem:
        def step(state, dW, dt):
            return bem_step(m, state, dW, dt)[0]

        def rate(state):
            return state * state

        start = math.sqrt(m.r0)
    else:
        def step(state, dW, dt):
            return milstein_step(m, state, dW, dt)

        def rate(state):
            return state

        start = m.r0

    fine = np.full(n_paths, start)
    coarse = np.full(n_paths, start)
    fine_acc = np.zeros(n_paths)
    coarse_acc = np.zeros(n_paths)
    dW_acc = np.zeros(n_paths)
    gap = np.zeros(n_paths)

    for i in range(n_steps):
        r_fine = rate(fine)
        fine_acc += r_fine
        if not collapsed and i % coarse_stride == 0:
            r_coarse = rate(coarse)
            coarse_acc += r_coarse
            np.maximum(gap, np.abs(r_fine - r_coarse), out=gap)
        dW = sqrt_h * sample_normal(rng, n_paths)
        fine = step(fine, dW, h)
        if not collapsed:
            dW_acc += dW
            if (i + 1) % coarse_stride == 0:
                coarse = step(coarse, dW_acc, coarse_stride * h)
                dW_acc = np.zeros(n_paths)

    r_terminal = rate(fine)
    sum_fine = h * fine_acc
    if collapsed:
        return RateDraw(sum_fine, sum_fine.copy(), r_terminal, r_terminal.copy(), gap)
    coarse_terminal = rate(coarse)
    np.maximum(gap, np.abs(r_terminal - coarse_terminal), out=gap)
    return RateDraw(sum_fine, (coarse_stride * h) * coarse_acc, r_terminal, coarse_terminal, gap)


def simulate_rate(m: RateModel, n_steps: int, horizon: float, rng: RngStream, n_paths: int = 1,
                  coarse_stride: int = 2) -> RateDraw:
    return m.simulate(n_steps, horizon, rng, n_paths, coarse_stride)


def rate_model_from_dict(data: dict) -> RateModel:
    """Build a rate model from the ``rate`` block of an experiment document."""
    try:
        kind = str(data['type']).lower()
        if kind == 'cir':
            return CIRRateModel(
                alpha=float(data['alpha']), beta=float(data['beta']), gamma=float(data['gamma']),
                r0=float(data['r0']), scheme=CIRScheme(str(data.get('scheme', 'exact')).lower()))
        if kind in ('hw', 'hull_white', 'hull-white'):
            cls = HullWhiteRateModel
        elif kind in ('bk', 'black_karasinski', 'black-karasinski'):
            cls = BlackKarasinskiRateModel
        else:
            raise ConfigurationError(f"Unknown rate model type: {data['type']!r}")
        if 'beta_segments' in data:
            beta_fn = PiecewiseConstant.from_segments(data['beta_segments'])
        else:
            beta_fn = PiecewiseConstant.constant(float(data['beta']))
        return cls(alpha=float(data['alpha']), beta_fn=beta_fn, gamma=float(data['gamma']),
                   r0=float(data['r0']))
    except KeyError as e:
        raise ConfigurationError(f"Rate model is missing key {e}") from e
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid rate model definition: {e}") from e
