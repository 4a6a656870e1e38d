import json
import math
from pathlib import Path

import numpy as np
import pytest

from src.rate_models import (BlackKarasinskiRateModel, CIRRateModel, CIRScheme, HullWhiteRateModel,
                             PiecewiseConstant)
from src.rng_distributions import RngStream
from src.variance_process import HestonParams

ROOT = Path(__file__).resolve().parents[1]
EXPERIMENTS = ROOT / 'config' / 'experiments'


def assert_moments(draws, mean, variance, band=4.0):
    """Sample mean and variance within ``band`` standard errors of the closed forms."""
    draws = np.asarray(draws, dtype=float)
    n = draws.size
    centered = draws - draws.mean()
    sample_var = centered.var(ddof=1)
    var_se = math.sqrt((np.mean(centered ** 4) - sample_var ** 2) / n)
    assert abs(draws.mean() - mean) <= band * math.sqrt(sample_var / n)
    assert abs(sample_var - variance) <= band * var_se


@pytest.fixture
def stream():
    def make(seed=12345, key=(0, 0, 0)):
        return RngStream(seed, key)
    return make


@pytest.fixture
def heston():
    """Equity block shared by the CIR-exact, Hull-White and Black-Karasinski sets."""
    return HestonParams(k=2.8, theta=0.05, sigma=0.25, rho=0.5, s0=1.0, v0=0.04, t=1.0)


@pytest.fixture
def heston_bem():
    return HestonParams(k=3.0, theta=0.04, sigma=0.25, rho=0.5, s0=1.0, v0=0.04, t=1.0)


@pytest.fixture
def cir_rate():
    return CIRRateModel(alpha=1.2, beta=0.06, gamma=0.25, r0=0.05)


@pytest.fixture
def bem_rate():
    return CIRRateModel(alpha=3.5, beta=0.06, gamma=0.25, r0=0.05, scheme=CIRScheme.BEM)


@pytest.fixture
def hw_rate():
    return HullWhiteRateModel(alpha=1.2, beta_fn=PiecewiseConstant.constant(0.06), gamma=0.5, r0=0.05)


@pytest.fixture
def bk_rate():
    return BlackKarasinskiRateModel(alpha=1.2, beta_fn=PiecewiseConstant.constant(0.06), gamma=0.25, r0=0.05)


@pytest.fixture
def deterministic_hw():
    return HullWhiteRateModel(alpha=1.2, beta_fn=PiecewiseConstant.constant(0.06), gamma=0.0, r0=0.05)


@pytest.fixture
def experiment_document():
    with open(EXPERIMENTS / 'cir_exact.json', 'r', encoding='utf-8') as f:
        return json.load(f)


@pytest.fixture
def settings_file(tmp_path):
    """Application settings without file logging and with small blocks."""
    path = tmp_path / 'config.yml'
    path.write_text(
        "runtime:\n"
        "  workers: 1\n"
        "  block_size: 256\n"
        "service:\n"
        "  max_samples: 5000\n"
        "logging:\n"
        "  standard_log:\n"
        "    console: false\n"
        "    file: null\n"
        "  audit_log:\n"
        "    console: false\n"
        "    file: null\n",
        encoding='utf-8')
    return path


@pytest.fixture
def write_document(tmp_path):
    def write(document, name='experiment.json'):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding='utf-8')
        return path
    return write
