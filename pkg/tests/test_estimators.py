import logging
import math

import numpy as np
import pytest

from conftest import EXPERIMENTS
from src.errors import ConfigurationError, ParameterError
from src.estimators import (BlockSummary, CoupledSum, LevelDistribution, Standard, block_layout,
                            coupled_sum_sample, expected_work, pairwise_reduce, run_estimator, sample_level,
                            standard_sample)
from src.experiment import load_experiment
from src.payoffs import Asset, Bond, Call, DigitalCall, Put
from src.rng_distributions import PathStreams, RngStream
from src.scheme import coupled_level_draw


def test_default_tail_probabilities():
    d = LevelDistribution.geometric()
    assert d.probability(0) == pytest.approx(0.64644661, abs=1e-8)
    assert d.tail(4) == pytest.approx(0.015625)
    assert d.tail(0) == 1.0


def test_expected_work_default_tail():
    work = expected_work(LevelDistribution.geometric(1.5))
    assert not work.divergent
    assert work.partial_sum == pytest.approx(1.0 / (1.0 - 2 ** -0.5), abs=1e-8)
    assert work.partial_sum == pytest.approx(3.41421356, abs=1e-8)


def test_expected_work_diverges_for_unit_exponent(caplog):
    with caplog.at_level(logging.WARNING, logger='src.estimators'):
        work = expected_work(LevelDistribution.geometric(1.0))
    assert work.divergent
    assert work.partial_sum == pytest.approx(61.0)
    assert 'diverges' in caplog.text


@pytest.mark.parametrize('table', [[0.5, 0.25], [1.0, 0.5, 0.7], [1.0, -0.1]])
def test_invalid_tail_tables(table):
    with pytest.raises(ConfigurationError):
        LevelDistribution.from_table(table)


def test_level_sampling_frequencies():
    d = LevelDistribution.geometric(1.5)
    levels = sample_level(d, RngStream(501), 1_000_000)
    assert levels.min() >= 0
    for n in (0, 1, 2):
        p = d.probability(n)
        freq = np.mean(levels == n)
        assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / levels.size)


def test_average_work_follows_the_level_law():
    levels = sample_level(LevelDistribution.geometric(1.5), RngStream(502), 1_000_000)
    work = 2.0 ** (levels + 1) - 1.0
    assert work.mean() == pytest.approx(3.41421356, rel=0.10)


def test_degenerate_distribution_always_returns_its_level():
    levels = sample_level(LevelDistribution.degenerate(3), RngStream(503), 1000)
    assert np.all(levels == 3)


def test_forced_level_zero_returns_the_level_zero_sample(heston, cir_rate):
    d = LevelDistribution.geometric()
    z, work = coupled_sum_sample(heston, cir_rate, Put(1.0), d, 77, block_index=2, n_paths=16,
                                 levels=np.zeros(16, dtype=np.int64))
    y0, _ = standard_sample(heston, cir_rate, Put(1.0), 0, 77, block_index=2, n_paths=16)
    assert np.array_equal(z, y0)
    assert np.array_equal(work, np.ones(16))


def test_work_counts_every_level_up_to_n(heston, cir_rate):
    levels = np.array([0, 1, 2, 3, 1])
    _, work = coupled_sum_sample(heston, cir_rate, Put(1.0), LevelDistribution.geometric(), 5, n_paths=5,
                                 levels=levels)
    assert np.array_equal(work, 2.0 ** (levels + 1) - 1)


def test_level_cap_truncates_work(heston, cir_rate):
    _, work = coupled_sum_sample(heston, cir_rate, Put(1.0), LevelDistribution.geometric(), 6, n_paths=2000,
                                 max_level=1)
    assert work.max() <= 3.0


def test_block_summary_merge_matches_direct_statistics():
    values = np.random.default_rng(0).normal(size=1000)
    parts = [BlockSummary.from_values(chunk, np.ones(chunk.size)) for chunk in np.array_split(values, 7)]
    merged = pairwise_reduce(parts)
    assert merged.count == 1000
    assert merged.mean == pytest.approx(values.mean(), abs=1e-14)
    assert merged.variance == pytest.approx(values.var(ddof=1), rel=1e-12)
    assert merged.work == 1000.0


def test_block_layout_depends_only_on_budget():
    assert block_layout(1000, 256) == [(0, 256), (1, 256), (2, 256), (3, 232)]
    with pytest.raises(ParameterError):
        block_layout(10, 0)


def test_deterministic_bond_price(heston, deterministic_hw):
    report = run_estimator(Standard(0), heston, deterministic_hw, Bond(), LevelDistribution.geometric(),
                           n_samples=500, seed=1, block_size=128)
    assert report.mean == pytest.approx(math.exp(-deterministic_hw.r0 * heston.t), rel=1e-13)
    assert report.std_error == pytest.approx(0.0, abs=1e-14)
    lo, hi = report.ci()
    assert hi - lo == pytest.approx(0.0, abs=1e-13)


def test_estimator_needs_two_samples(heston, cir_rate):
    with pytest.raises(ParameterError):
        run_estimator(CoupledSum(), heston, cir_rate, Put(1.0), LevelDistribution.geometric(), 1, seed=0)


def test_same_seed_same_report(heston, cir_rate):
    kwargs = dict(n_samples=600, seed=8, block_size=128)
    a = run_estimator(CoupledSum(), heston, cir_rate, Put(1.0), LevelDistribution.geometric(), **kwargs)
    b = run_estimator(CoupledSum(), heston, cir_rate, Put(1.0), LevelDistribution.geometric(), **kwargs)
    assert (a.mean, a.std_error, a.avg_work_units) == (b.mean, b.std_error, b.avg_work_units)


def test_result_does_not_depend_on_worker_count(heston, hw_rate):
    kwargs = dict(n_samples=1000, seed=9, block_size=200)
    d = LevelDistribution.geometric()
    serial = run_estimator(CoupledSum(), heston, hw_rate, Put(1.0), d, workers=1, **kwargs)
    parallel = run_estimator(CoupledSum(), heston, hw_rate, Put(1.0), d, workers=2, **kwargs)
    assert (serial.mean, serial.std_error, serial.avg_work_units) == \
        (parallel.mean, parallel.std_error, parallel.avg_work_units)


def test_put_call_parity_with_common_streams(heston, cir_rate):
    d = LevelDistribution.geometric()
    means = {payoff.kind: run_estimator(Standard(4), heston, cir_rate, payoff, d, 2000, seed=3,
                                        block_size=512).mean
             for payoff in (Put(1.0), Call(1.0), Asset(), Bond())}
    assert means['call'] - means['put'] == pytest.approx(means['asset'] - means['bond'], abs=1e-12)


def test_degenerate_tail_telescopes_to_fixed_level(heston, cir_rate):
    z = run_estimator(CoupledSum(), heston, cir_rate, Put(1.0), LevelDistribution.degenerate(3), 100_000,
                      seed=10)
    y = run_estimator(Standard(3), heston, cir_rate, Put(1.0), LevelDistribution.geometric(), 100_000, seed=11)
    assert z.avg_work_units == pytest.approx(15.0)
    assert abs(z.mean - y.mean) <= 3 * math.hypot(z.std_error, y.std_error)


def test_coupled_sum_is_unbiased_against_fine_level(heston, cir_rate):
    z = run_estimator(CoupledSum(), heston, cir_rate, Put(1.0), LevelDistribution.geometric(), 100_000, seed=12)
    ref = run_estimator(Standard(6), heston, cir_rate, Put(1.0), LevelDistribution.geometric(), 100_000, seed=13)
    assert abs(z.mean - ref.mean) <= 3 * math.hypot(z.std_error, ref.std_error)


def test_standard_sample_matches_the_coupled_fine_branch(heston, bem_rate):
    streams = PathStreams(21, 0, 4)
    coupled = coupled_level_draw(heston, bem_rate, Put(1.0), 4, streams, 500)
    y, work = standard_sample(heston, bem_rate, Put(1.0), 4, seed=21, n_paths=500)
    np.testing.assert_array_equal(y, coupled.y_fine)
    assert set(work) == {16.0}


@pytest.mark.slow
@pytest.mark.parametrize('payoff', [Put(1.0), Call(1.0), DigitalCall(1.0)], ids=lambda p: p.label)
@pytest.mark.parametrize('name', ['cir_exact', 'cir_bem', 'hw', 'bk'])
def test_unbiasedness_at_full_scale(name, payoff):
    c = load_experiment(EXPERIMENTS / f'{name}.json')
    d = LevelDistribution.geometric()
    z = run_estimator(CoupledSum(), c.heston, c.rate, payoff, d, 1_000_000, seed=14)
    ref = run_estimator(Standard(9), c.heston, c.rate, payoff, d, 1_000_000, seed=15)
    assert abs(z.mean - ref.mean) <= 3 * math.hypot(z.std_error, ref.std_error)
    assert z.avg_work_units == pytest.approx(3.41421356, rel=0.10)
