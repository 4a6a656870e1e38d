import copy
import json
import math

import numpy as np
import pytest
import yaml

import main
from conftest import EXPERIMENTS
from src.errors import ConfigurationError
from src.estimators import EstimatorReport, LevelDistribution
from src.experiment import experiment_from_dict, load_experiment
from src.harness import (ConvergenceRow, fit_slope, rmse_from_reports, run_convergence, run_price,
                         run_rmse_table, validate_config, variance_summands)
from src.payoffs import Bond, Call, DigitalCall, Put
from src.reporting import read_csv

PUBLISHED_RMSE = {
    'cir_exact': {'put': 1.21e-4, 'call': 3.39e-4, 'digital': 4.22e-4},
    'cir_bem': {'put': 1.96e-4, 'call': 1.4e-3, 'digital': 4.45e-4},
    'hw': {'put': 4.16e-4, 'call': 4.57e-4, 'digital': 6.32e-4},
    'bk': {'put': 1.78e-4, 'call': 5.31e-4, 'digital': 8.32e-4},
}


def _document(base, **experiment):
    document = copy.deepcopy(base)
    document['experiment'].update(experiment)
    return document


def _codes(diagnostics):
    return [d.code for d in diagnostics]


@pytest.mark.parametrize('name', ['cir_exact', 'cir_bem', 'hw', 'bk'])
def test_shipped_experiments_load(name):
    c = load_experiment(EXPERIMENTS / f'{name}.json')
    assert [p.kind for p in c.payoffs] == ['put', 'call', 'digital_call']
    assert c.levels == [2, 3, 4, 5, 6] and c.ref_level == 9
    assert not [d for d in validate_config(c) if d.is_error]


def test_reference_parameter_sets_have_no_findings():
    for name in ('cir_exact', 'cir_bem'):
        assert validate_config(load_experiment(EXPERIMENTS / f'{name}.json')) == []


def test_load_experiment_errors(tmp_path, write_document):
    with pytest.raises(ConfigurationError):
        load_experiment(tmp_path / 'missing.json')
    listing = tmp_path / 'list.yml'
    listing.write_text('- 1\n- 2\n', encoding='utf-8')
    with pytest.raises(ConfigurationError):
        load_experiment(listing)
    with pytest.raises(ConfigurationError):
        load_experiment(write_document({'name': 'no-heston'}))


def test_fractional_level_is_rejected(experiment_document):
    with pytest.raises(ConfigurationError):
        experiment_from_dict(_document(experiment_document, levels=[2, 2.5]))


def test_yaml_exponent_strings_are_integers(experiment_document, tmp_path):
    path = tmp_path / 'experiment.yml'
    text = yaml.safe_dump(_document(experiment_document, samples=12345), sort_keys=False)
    path.write_text(text.replace('samples: 12345', 'samples: 1e5'), encoding='utf-8')
    assert yaml.safe_load(path.read_text(encoding='utf-8'))['experiment']['samples'] == '1e5'
    assert load_experiment(path).samples == 100000


@pytest.mark.parametrize('value', ['1.5e-1', 'many', '2.5'])
def test_non_integer_strings_are_rejected(experiment_document, value):
    with pytest.raises(ConfigurationError):
        experiment_from_dict(_document(experiment_document, samples=value))


def test_overrides_skip_unset_flags(experiment_document):
    c = experiment_from_dict(experiment_document)
    changed = c.with_overrides(seed=5, samples=None, output_path='out/x.csv')
    assert changed.seed == 5 and changed.samples == c.samples
    assert changed.output_path.name == 'x.csv'
    assert experiment_from_dict(changed.to_dict()).to_dict() == changed.to_dict()


def test_full_correlation_digital_is_an_error(experiment_document):
    document = copy.deepcopy(experiment_document)
    document['heston']['rho'] = 1.0
    assert 'degenerate_digital' in _codes(validate_config(experiment_from_dict(document)))
    document['payoffs'] = [{'type': 'put', 'strike': 1.0}]
    assert validate_config(experiment_from_dict(document)) == []


def test_repeated_payoff_is_an_error(experiment_document):
    document = copy.deepcopy(experiment_document)
    document['payoffs'] = [{'type': 'put', 'strike': 1.0}, {'type': 'call', 'strike': 1.0},
                           {'type': 'put', 'strike': 1}]
    found = [d for d in validate_config(experiment_from_dict(document)) if d.code == 'duplicate_payoff']
    assert len(found) == 1 and found[0].is_error
    assert 'put_k1' in found[0].message


def test_cli_price_rejects_repeated_payoff(settings_file, write_document, experiment_document, tmp_path):
    document = _document(experiment_document, samples=300)
    document['payoffs'] = [{'type': 'digital', 'strike': 1.0}, {'type': 'digital_call', 'strike': 1.0}]
    out = tmp_path / 'prices.csv'
    code = main.main(['price', '--config', str(write_document(document)), '--settings', str(settings_file),
                      '--no-log-file', '--output', str(out)])
    assert code == 2
    assert not out.exists()


@pytest.mark.parametrize('changes, code, severity', [
    ({'ref_level': 4}, 'ref_level', 'error'),
    ({'levels': [-1, 2]}, 'non_dyadic_level', 'error'),
    ({'samples': 50}, 'samples', 'error'),
    ({'tail_exponent': 1.0}, 'divergent_work', 'error'),
    ({'tail_exponent': 2.0}, 'variance_condition', 'warning'),
    ({'max_level': 5}, 'biased_cap', 'warning'),
    ({'fit_window': [6, 2]}, 'fit_window', 'error'),
])
def test_validation_findings(experiment_document, changes, code, severity):
    found = {d.code: d for d in validate_config(experiment_from_dict(_document(experiment_document, **changes)))}
    assert code in found
    assert found[code].severity == severity


def test_weak_bem_parameters_warn(experiment_document):
    document = copy.deepcopy(experiment_document)
    document['rate']['scheme'] = 'bem'
    assert _codes(validate_config(experiment_from_dict(document))) == ['bem_order']


def test_fit_slope_recovers_synthetic_order():
    rows = [ConvergenceRow(n, 2.0 ** -n, 3.0 * 2.0 ** (-2 * n), 1e-3 * 2.0 ** (-2 * n)) for n in range(2, 7)]
    slope, slope_se, fitted = fit_slope(rows, (2, 6), seed=1)
    assert slope == pytest.approx(-2.0, abs=1e-10)
    assert 0 < slope_se < 0.01
    assert fitted == [2, 3, 4, 5, 6]


def test_fit_slope_needs_two_positive_errors():
    rows = [ConvergenceRow(2, 0.25, 1e-3, 1e-5), ConvergenceRow(3, 0.125, 0.0, 0.0),
            ConvergenceRow(8, 2.0 ** -8, 1e-6, 1e-8)]
    assert fit_slope(rows, (2, 6), seed=1) == (None, None, [2])


def test_variance_summand_ratios():
    rows = [ConvergenceRow(n, 2.0 ** -n, 2.0 ** (-2 * n), 0.0) for n in range(2, 7)]
    summands, ratios = variance_summands(rows, LevelDistribution.geometric(1.5))
    assert [n for n, _ in summands] == [3, 4, 5, 6]
    assert all(ratio == pytest.approx(2 ** -0.5) for _, ratio in ratios)


def test_rmse_combines_bias_and_error():
    z = EstimatorReport(mean=1.0, std_error=0.003, n_samples=100, avg_work_units=3.4, elapsed_seconds=0.1)
    ref = EstimatorReport(mean=1.004, std_error=0.0, n_samples=100, avg_work_units=512, elapsed_seconds=1.0)
    rmse, rmse_se = rmse_from_reports(z, ref)
    assert rmse == pytest.approx(0.005)
    assert rmse_se == pytest.approx(0.0024)


def test_err_vanishes_on_the_reference_grid(experiment_document):
    c = experiment_from_dict(_document(experiment_document, levels=[4], ref_level=4, samples=200))
    result = run_convergence(c.with_overrides(block_size=128), Put(1.0))
    assert result.rows[0].err == 0.0
    assert result.slope is None
    assert _codes(result.diagnostics) == ['insufficient_err']


def test_deterministic_rate_bond_errors(experiment_document):
    document = _document(experiment_document, levels=[2, 3], ref_level=5, samples=100)
    document['rate'] = {'type': 'hull_white', 'alpha': 1.2, 'beta': 0.06, 'gamma': 0.0, 'r0': 0.05}
    c = experiment_from_dict(document).with_overrides(block_size=64)

    def discount_sum(n):
        h = 2.0 ** -n
        t = np.arange(2 ** n) * h
        return h * np.sum(0.06 + (0.05 - 0.06) * np.exp(-1.2 * t))

    result = run_convergence(c, Bond())
    for row in result.rows:
        expected = (math.exp(-discount_sum(row.n)) - math.exp(-discount_sum(5))) ** 2
        assert row.err == pytest.approx(expected, rel=1e-8)
        assert row.err_se == pytest.approx(0.0, abs=1e-15)


def test_price_is_reproducible(experiment_document):
    c = experiment_from_dict(_document(experiment_document, samples=300)).with_overrides(block_size=128)
    a, b = run_price(c, Put(1.0)), run_price(c, Put(1.0))
    assert (a.mean, a.std_error) == (b.mean, b.std_error)
    assert a.n_samples == 300


def test_cli_validate(settings_file, write_document, experiment_document, capsys):
    path = write_document(experiment_document)
    code = main.main(['validate', '--config', str(path), '--settings', str(settings_file), '--no-log-file'])
    assert code == 0
    assert 'no findings' in capsys.readouterr().out


def test_cli_validate_reports_configuration_errors(settings_file, write_document, experiment_document):
    document = copy.deepcopy(experiment_document)
    document['heston']['rho'] = 1.0
    path = write_document(document)
    assert main.main(['--settings', str(settings_file), 'validate', '--config', str(path), '--no-log-file']) == 2


def test_cli_unreadable_experiment_is_a_configuration_error(settings_file, tmp_path):
    args = ['validate', '--config', str(tmp_path / 'nope.json'), '--settings', str(settings_file), '--no-log-file']
    assert main.main(args) == 2


def test_cli_convergence_without_usable_levels_fails(settings_file, write_document, experiment_document, tmp_path):
    document = _document(experiment_document, levels=[3], ref_level=3, samples=200)
    document['payoffs'] = [{'type': 'put', 'strike': 1.0}]
    document['output'] = str(tmp_path / 'conv.csv')
    path = write_document(document)
    code = main.main(['convergence', '--config', str(path), '--settings', str(settings_file), '--no-log-file'])
    assert code == 3
    rows = read_csv(tmp_path / 'conv.csv')
    assert rows == [{'n': '3', 'h': '0.125', 'err': '0.0', 'err_se': '0.0'}]
    meta = json.loads((tmp_path / 'conv.meta.json').read_text(encoding='utf-8'))
    assert meta['slope'] is None


def test_cli_price_writes_csv(settings_file, write_document, experiment_document, tmp_path):
    document = _document(experiment_document, samples=300)
    path = write_document(document)
    out = tmp_path / 'prices.csv'
    code = main.main(['price', '--config', str(path), '--settings', str(settings_file), '--no-log-file',
                      '--output', str(out), '--seed', '11'])
    assert code == 0
    rows = read_csv(out)
    assert [r['payoff'] for r in rows] == ['put_k1', 'call_k1', 'digital_call_k1']
    for r in rows:
        assert float(r['ci_lo']) <= float(r['mean']) <= float(r['ci_hi'])
        assert r['n_samples'] == '300'


@pytest.mark.slow
@pytest.mark.parametrize('payoff', [Put(1.0), Call(1.0), DigitalCall(1.0)], ids=lambda p: p.label)
@pytest.mark.parametrize('name', ['cir_exact', 'cir_bem', 'hw', 'bk'])
def test_convergence_slope_at_full_scale(name, payoff):
    c = load_experiment(EXPERIMENTS / f'{name}.json')
    result = run_convergence(c, payoff)
    assert -2.4 <= result.slope <= -1.6


@pytest.mark.slow
@pytest.mark.parametrize('name', ['cir_exact', 'cir_bem', 'hw', 'bk'])
def test_rmse_table_at_full_scale(name):
    rows = run_rmse_table(load_experiment(EXPERIMENTS / f'{name}.json'))
    for row in rows:
        published = PUBLISHED_RMSE[name][row.payoff.split('_')[0]]
        assert published / 3 <= row.rmse <= 3 * published
        assert row.avg_work == pytest.approx(3.41421356, rel=0.10)
