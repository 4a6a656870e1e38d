"""
Experiment operations behind the command line: validation, the Err(h)
convergence study, the RMSE/work table and single unbiased prices.
"""

import asyncio
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import Diagnostic
from .estimators import (CoupledSum, EstimatorReport, LevelDistribution, Standard, run_blocks_async,
                         run_estimator_async)
from .experiment import ExperimentConfig
from .payoffs import Payoff
from .rate_models import CIRRateModel, CIRScheme
from .rng_distributions import PathStreams, derive_seed
from .scheme import reference_pair_draw

logger = logging.getLogger(__name__)

BOOTSTRAP_REPLICATES = 2000


@dataclass
class ConvergenceRow:
    n: int
    h: float
    err: float
    err_se: float


@dataclass
class ConvergenceResult:
    model: str
    payoff: str
    rows: List[ConvergenceRow]
    slope: Optional[float]
    slope_se: Optional[float]
    window: Tuple[int, int]
    fitted_levels: List[int] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def metadata(self) -> dict:
        return {'model': self.model, 'payoff': self.payoff, 'slope': self.slope, 'slope_se': self.slope_se,
                'fit_window': list(self.window), 'fitted_levels': self.fitted_levels,
                'diagnostics': [d.to_dict() for d in self.diagnostics]}


@dataclass
class RmseRow:
    model: str
    payoff: str
    rmse: float
    rmse_se: float
    avg_work: float
    elapsed_s: float
    mean: float
    reference: float


def validate_config(c: ExperimentConfig) -> List[Diagnostic]:
    found: List[Diagnostic] = []
    p = c.heston
    digital = [payoff for payoff in c.payoffs if payoff.conditional]

    if digital and abs(p.rho) >= 1.0:
        found.append(Diagnostic('error', 'degenerate_digital',
                                f"|rho| = 1 leaves no Gaussian to integrate out for {digital[0].label}"))
    if digital and p.feller_index <= 1.0:
        found.append(Diagnostic('warning', 'feller_digital',
                                f"2k*theta/sigma^2 = {p.feller_index:.4g} <= 1: "
                                "the O(h^2) rate for digital payoffs is not guaranteed"))

    labels = [payoff.label for payoff in c.payoffs]
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        found.append(Diagnostic('error', 'duplicate_payoff',
                                f"Payoffs must be distinct, repeated: {', '.join(duplicates)}"))

    rate = c.rate
    if isinstance(rate, CIRRateModel) and rate.scheme is CIRScheme.BEM and rate.bem_root_constant < 0:
        found.append(Diagnostic('error', 'bem_root',
                                f"beta - gamma^2/(4 alpha) = {rate.bem_root_constant:.4g} < 0"))
    found.extend(rate.diagnostics())

    bad_levels = [n for n in list(c.levels) + [c.ref_level] if not isinstance(n, int) or n < 0]
    if bad_levels:
        found.append(Diagnostic('error', 'non_dyadic_level',
                                f"Levels must be nonnegative integers (h = T/2^n), got {bad_levels}"))
    elif c.levels and c.ref_level < max(c.levels):
        found.append(Diagnostic('error', 'ref_level',
                                f"ref_level {c.ref_level} is coarser than level {max(c.levels)}"))
    if c.samples < 100:
        found.append(Diagnostic('error', 'samples', f"At least 100 samples are required, got {c.samples}"))

    if c.tail_table is None:
        if c.tail_exponent <= 1.0:
            found.append(Diagnostic('error', 'divergent_work',
                                    f"Tail 2^(-{c.tail_exponent:g}n) gives infinite expected work"))
        elif c.tail_exponent >= 2.0:
            found.append(Diagnostic('warning', 'variance_condition',
                                    f"Tail 2^(-{c.tail_exponent:g}n) decays at least as fast as Err(h): "
                                    "the coupled-sum variance may be infinite"))
    if c.max_level is not None:
        found.append(Diagnostic('warning', 'biased_cap',
                                f"max_level={c.max_level} truncates the randomized level and biases prices"))
    if c.fit_window[0] > c.fit_window[1]:
        found.append(Diagnostic('error', 'fit_window', f"Empty fit window {c.fit_window}"))
    return found


def _convergence_kernel(p, m, payoff, n_coarse, n_ref, seed, block_index, n_paths):
    y_coarse, y_ref = reference_pair_draw(p, m, payoff, n_coarse, n_ref, PathStreams(seed, block_index, n_ref),
                                          n_paths)
    return (y_coarse - y_ref) ** 2, np.full(n_paths, float(2 ** n_ref))


def fit_slope(rows: Sequence[ConvergenceRow], window: Tuple[int, int], seed: int):
    """Least-squares slope of log2(err) against n plus a parametric bootstrap SE.

    Returns (slope, slope_se, fitted levels); slope is None when fewer than two
    positive errors fall inside the window.
    """
    used = [r for r in rows if window[0] <= r.n <= window[1] and r.err > 0]
    if len(used) < 2:
        return None, None, [r.n for r in used]
    ns = np.array([r.n for r in used], dtype=float)
    errs = np.array([r.err for r in used])
    ses = np.array([r.err_se for r in used])
    slope = float(np.polyfit(ns, np.log2(errs), 1)[0])

    gen = np.random.default_rng(derive_seed(seed, 'bootstrap'))
    resampled = errs + ses * gen.standard_normal((BOOTSTRAP_REPLICATES, errs.size))
    resampled = np.maximum(resampled, errs * 1e-3)
    slopes = np.polyfit(ns, np.log2(resampled).T, 1)[0]
    return slope, float(np.std(slopes, ddof=1)), [r.n for r in used]


def variance_summands(rows: Sequence[ConvergenceRow], d: LevelDistribution):
    """Terms E[(Y_{n-1} - Y)^2] / P(N >= n) of the finite-variance series and their decay ratios."""
    by_level = {r.n: r.err for r in rows}
    summands = [(n, by_level[n - 1] / d.tail(n)) for n in sorted(by_level) if n - 1 in by_level and d.tail(n) > 0]
    ratios = [(b[0], b[1] / a[1]) for a, b in zip(summands, summands[1:]) if b[0] == a[0] + 1 and a[1] > 0]
    return summands, ratios


async def run_convergence_async(c: ExperimentConfig, payoff: Payoff) -> ConvergenceResult:
    p, m = c.heston, c.rate
    rows = []
    for n in c.levels:
        kernel = partial(_convergence_kernel, p, m, payoff, n, c.ref_level, c.seed)
        summary = await run_blocks_async(kernel, c.samples, c.workers, c.block_size)
        rows.append(ConvergenceRow(n=n, h=p.t / 2 ** n, err=summary.mean, err_se=summary.std_error))
        logger.info(f"{c.model_label} {payoff.label}: n={n} Err={summary.mean:.4e} (se {summary.std_error:.2e})")

    slope, slope_se, fitted = fit_slope(rows, c.fit_window, c.seed)
    diagnostics = []
    if slope is None:
        diagnostics.append(Diagnostic('error', 'insufficient_err',
                                      f"Fewer than two positive Err(h) estimates in window {c.fit_window}; "
                                      "increase the sample budget"))
        logger.warning(diagnostics[-1].message)
    else:
        logger.info(f"{c.model_label} {payoff.label}: slope {slope:.3f} +- {slope_se:.3f} over n={fitted}")
    return ConvergenceResult(c.model_label, payoff.label, rows, slope, slope_se, c.fit_window, fitted, diagnostics)


def run_convergence(c: ExperimentConfig, payoff: Payoff) -> ConvergenceResult:
    return asyncio.run(run_convergence_async(c, payoff))


async def reference_price_async(c: ExperimentConfig, payoff: Payoff) -> EstimatorReport:
    return await run_estimator_async(Standard(c.ref_level), c.heston, c.rate, payoff, c.level_distribution(),
                                     c.samples, derive_seed(c.seed, 'reference'), c.workers, c.block_size)


async def run_price_async(c: ExperimentConfig, payoff: Payoff) -> EstimatorReport:
    return await run_estimator_async(CoupledSum(), c.heston, c.rate, payoff, c.level_distribution(), c.samples,
                                     c.seed, c.workers, c.block_size, c.max_level)


def run_price(c: ExperimentConfig, payoff: Payoff) -> EstimatorReport:
    return asyncio.run(run_price_async(c, payoff))


def rmse_from_reports(z: EstimatorReport, ref: EstimatorReport) -> Tuple[float, float]:
    """RMSE of the Z-mean around the reference and its delta-method standard error."""
    bias = z.mean - ref.mean
    rmse = math.sqrt(z.std_error ** 2 + bias ** 2)
    bias_se = math.sqrt(z.std_error ** 2 + ref.std_error ** 2)
    rmse_se = abs(bias) * bias_se / rmse if rmse > 0 else 0.0
    return rmse, rmse_se


async def run_rmse_table_async(c: ExperimentConfig) -> List[RmseRow]:
    rows = []
    for payoff in c.payoffs:
        ref = await reference_price_async(c, payoff)
        z = await run_price_async(c, payoff)
        rmse, rmse_se = rmse_from_reports(z, ref)
        rows.append(RmseRow(c.model_label, payoff.label, rmse, rmse_se, z.avg_work_units, z.elapsed_seconds,
                            z.mean, ref.mean))
        logger.info(f"{c.model_label} {payoff.label}: RMSE={rmse:.3e} work={z.avg_work_units:.4f} "
                    f"({z.elapsed_seconds:.2f}s)")
    return rows


def run_rmse_table(c: ExperimentConfig) -> List[RmseRow]:
    return asyncio.run(run_rmse_table_async(c))
