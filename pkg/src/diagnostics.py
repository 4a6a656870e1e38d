"""
Sampler self-checks run by the ``diagnostics`` command.

Every check compares a sample statistic with a closed form and carries its
own tolerance: 4 standard errors for moments, the 1% two-sample
Kolmogorov-Smirnov critical value for the ncx2 branch comparison, and a fixed
band for the BEM/Milstein strong-order ratios.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from .experiment import ExperimentConfig
from .rate_models import (BlackKarasinskiRateModel, CIRRateModel, CIRScheme, HullWhiteRateModel, RateModel,
                          bk_transition, cir_exact_transition, hw_transition)
from .rng_distributions import NcChiSqMethod, NcChiSqParams, RngStream, derive_seed, sample_ncx2
from .variance_process import HestonParams, variance_transition

logger = logging.getLogger(__name__)

DEFAULT_DRAWS = 1_000_000
MOMENT_BAND = 4.0
# c(alpha) of the two-sample KS test at alpha = 0.01
KS_COEFFICIENT = 1.628
STRONG_ORDER_LEVELS = (3, 4, 5, 6)
STRONG_ORDER_REF_LEVEL = 10
STRONG_ORDER_BAND = (1.6, 2.6)
STRONG_ORDER_PATHS = 20000


@dataclass
class DiagnosticCheck:
    name: str
    observed: float
    expected: float
    tolerance: float
    passed: bool

    @classmethod
    def within(cls, name: str, observed: float, expected: float, tolerance: float) -> 'DiagnosticCheck':
        return cls(name, float(observed), float(expected), float(tolerance),
                   bool(abs(observed - expected) <= tolerance))


def moment_checks(name: str, draws: np.ndarray, mean: float, variance: float,
                  band: float = MOMENT_BAND) -> List[DiagnosticCheck]:
    """Sample mean and variance against closed forms, each within ``band`` standard errors."""
    draws = np.asarray(draws, dtype=float)
    n = draws.size
    sample_mean = float(np.mean(draws))
    centered = draws - sample_mean
    sample_var = float(np.mean(centered ** 2)) * n / (n - 1)
    fourth = float(np.mean(centered ** 4))
    mean_se = math.sqrt(sample_var / n)
    var_se = math.sqrt(max(fourth - sample_var ** 2, 0.0) / n)
    return [
        DiagnosticCheck.within(f"{name}.mean", sample_mean, mean, band * mean_se),
        DiagnosticCheck.within(f"{name}.variance", sample_var, variance, band * var_se),
    ]


def _stream(seed: int, name: str) -> RngStream:
    return RngStream(derive_seed(seed, name))


def ncx2_checks(seed: int, n_draws: int) -> List[DiagnosticCheck]:
    checks = []
    for dof, lam in ((8.96, 3.0), (0.5, 10.0)):
        params = NcChiSqParams(dof, lam)
        name = f"ncx2_d{dof:g}_l{lam:g}"
        draws = sample_ncx2(params, _stream(seed, name), n_draws)
        checks.extend(moment_checks(name, draws, float(params.mean), float(params.variance)))

    # both branches are exact for 1 <= d, so their laws must agree
    params = NcChiSqParams(1.5, 3.0)
    left = sample_ncx2(params, _stream(seed, 'ncx2_ks_decomposition'), n_draws, NcChiSqMethod.DECOMPOSITION)
    right = sample_ncx2(params, _stream(seed, 'ncx2_ks_mixture'), n_draws, NcChiSqMethod.POISSON_MIXTURE)
    statistic = stats.ks_2samp(left, right).statistic
    critical = KS_COEFFICIENT * math.sqrt(2.0 / n_draws)
    checks.append(DiagnosticCheck.within('ncx2_branch_ks', statistic, 0.0, critical))
    return checks


def variance_checks(p: HestonParams, seed: int, n_draws: int) -> List[DiagnosticCheck]:
    scale, factor = p.transition_constants(p.t)
    law = NcChiSqParams(p.dof, factor * p.v0)
    draws = variance_transition(p, p.v0, p.t, _stream(seed, 'variance_transition'), n_draws)
    return moment_checks('variance_transition', draws, scale * float(law.mean),
                         scale ** 2 * float(law.variance))


def rate_checks(m: RateModel, horizon: float, seed: int, n_draws: int) -> List[DiagnosticCheck]:
    rng = _stream(seed, 'rate_transition')
    if isinstance(m, CIRRateModel):
        scale, factor = m.transition_constants(horizon)
        law = NcChiSqParams(m.dof, factor * m.r0)
        draws = cir_exact_transition(m, m.r0, horizon, rng, n_draws)
        return moment_checks('cir_transition', draws, scale * float(law.mean), scale ** 2 * float(law.variance))
    if isinstance(m, HullWhiteRateModel):
        mean, var = m.moments(m.r0, 0.0, horizon)
        draws = hw_transition(m, m.r0, 0.0, horizon, rng, n_draws)
        return moment_checks('hw_transition', draws, float(mean), var)
    if isinstance(m, BlackKarasinskiRateModel):
        mean, var = m.log_moments(math.log(m.r0), 0.0, horizon)
        draws = bk_transition(m, m.r0, 0.0, horizon, rng, n_draws)
        return moment_checks('bk_transition.log', np.log(draws), float(mean), var)
    return []


@dataclass
class StrongError:
    """L2 errors of one coarse level against the shared-increment reference."""

    level: int
    endpoint: float
    max_gap: float


def strong_errors(m: CIRRateModel, horizon: float, seed: int, levels: Sequence[int] = STRONG_ORDER_LEVELS,
                  ref_level: int = STRONG_ORDER_REF_LEVEL, n_paths: int = STRONG_ORDER_PATHS) -> List[StrongError]:
    """Endpoint error and the error of max_i |r(h) - r(h_ref)| over the coarse grid points, per level."""
    errors = []
    for n in levels:
        rng = _stream(seed, f"strong_order_{n}")
        draw = m.simulate(2 ** ref_level, horizon, rng, n_paths, coarse_stride=2 ** (ref_level - n))
        endpoint = math.sqrt(float(np.mean((draw.r_terminal - draw.coarse_r_terminal) ** 2)))
        max_gap = math.sqrt(float(np.mean(draw.max_coarse_gap ** 2)))
        errors.append(StrongError(n, endpoint, max_gap))
    return errors


def _ratio_check(name: str, coarse: float, fine: float) -> DiagnosticCheck:
    lo, hi = STRONG_ORDER_BAND
    ratio = coarse / fine if fine > 0 else math.inf
    return DiagnosticCheck(name, ratio, 2.0, (hi - lo) / 2.0, bool(lo <= ratio <= hi))


def strong_order_checks(m: CIRRateModel, horizon: float, seed: int,
                        n_paths: int = STRONG_ORDER_PATHS) -> List[DiagnosticCheck]:
    """Successive error ratios of the pathwise maximum and of the endpoint; order one gives 2."""
    errors = strong_errors(m, horizon, seed, n_paths=n_paths)
    checks = []
    for coarse, fine in zip(errors, errors[1:]):
        prefix = f"{m.scheme.value}_strong_ratio_n{fine.level}"
        checks.append(_ratio_check(prefix, coarse.max_gap, fine.max_gap))
        checks.append(_ratio_check(f"{prefix}_endpoint", coarse.endpoint, fine.endpoint))
    return checks


def run_diagnostics(c: ExperimentConfig, n_draws: Optional[int] = None) -> List[DiagnosticCheck]:
    n_draws = n_draws or DEFAULT_DRAWS
    checks = ncx2_checks(c.seed, n_draws)
    checks += variance_checks(c.heston, c.seed, n_draws)
    checks += rate_checks(c.rate, c.heston.t, c.seed, n_draws)
    if isinstance(c.rate, CIRRateModel) and c.rate.scheme is not CIRScheme.EXACT:
        checks += strong_order_checks(c.rate, c.heston.t, c.seed, min(n_draws, STRONG_ORDER_PATHS))

    for check in checks:
        level = logging.INFO if check.passed else logging.WARNING
        logger.log(level, f"{check.name}: observed={check.observed:.6g} expected={check.expected:.6g} "
                          f"tol={check.tolerance:.3g} {'ok' if check.passed else 'FAILED'}")
    return checks
