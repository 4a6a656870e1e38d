import math

import numpy as np
import pytest

from conftest import assert_moments
from src.errors import ConfigurationError, ParameterError
from src.rng_distributions import NcChiSqParams
from src.variance_process import HestonParams, simulate_variance, variance_transition


def test_reference_parameters(heston):
    assert heston.feller_index == pytest.approx(4.48)
    assert heston.dof == pytest.approx(8.96)
    assert heston.mean_variance(1.0, heston.v0) == pytest.approx(0.04939188, abs=1e-7)
    assert heston.integrated_mean_variance() == pytest.approx(0.046642, abs=1e-5)


@pytest.mark.parametrize('field, value', [('k', 0.0), ('theta', -0.1), ('sigma', 0.0), ('v0', -0.01),
                                          ('t', 0.0), ('rho', 1.5)])
def test_invalid_heston_parameters(heston, field, value):
    params = dict(k=heston.k, theta=heston.theta, sigma=heston.sigma, rho=heston.rho, s0=heston.s0,
                  v0=heston.v0, t=heston.t)
    params[field] = value
    with pytest.raises(ConfigurationError):
        HestonParams(**params)


def test_transition_moments(heston, stream):
    draws = variance_transition(heston, heston.v0, 1.0, stream(201), 1_000_000)
    scale, factor = heston.transition_constants(1.0)
    law = NcChiSqParams(heston.dof, factor * heston.v0)
    assert scale * float(law.mean) == pytest.approx(0.04939188, abs=1e-7)
    assert_moments(draws, scale * float(law.mean), scale ** 2 * float(law.variance))


def test_transition_rejects_bad_arguments(heston, stream):
    with pytest.raises(ParameterError):
        variance_transition(heston, heston.v0, 0.0, stream())
    with pytest.raises(ParameterError):
        variance_transition(heston, -0.01, 0.5, stream())


def test_single_step_integral_is_left_rectangle(heston, stream):
    draw = simulate_variance(heston, 1, stream(), n_paths=4)
    assert np.array_equal(draw.fine_integral, np.full(4, heston.v0 * heston.t))
    assert np.array_equal(draw.coarse_integral, draw.fine_integral)


def test_non_dyadic_step_count(heston, stream):
    with pytest.raises(ParameterError):
        simulate_variance(heston, 3, stream())


def test_coarse_sum_uses_every_other_grid_point(heston, stream):
    n_steps, n_paths = 16, 50
    h = heston.t / n_steps
    draw = simulate_variance(heston, n_steps, stream(202), n_paths, coarse_stride=2, record_path=True)
    assert draw.path.shape == (n_steps + 1, n_paths)
    assert np.all(draw.path >= 0)
    assert np.allclose(draw.fine_integral, h * draw.path[:-1].sum(axis=0), rtol=1e-13)
    assert np.allclose(draw.coarse_integral, 2 * h * draw.path[:-1:2].sum(axis=0), rtol=1e-13)
    assert np.array_equal(draw.v_terminal, draw.path[-1])


def test_same_stream_gives_same_path(heston, stream):
    a = simulate_variance(heston, 8, stream(203), 10)
    b = simulate_variance(heston, 8, stream(203), 10)
    assert np.array_equal(a.fine_integral, b.fine_integral)
    assert np.array_equal(a.v_terminal, b.v_terminal)


def test_fine_integral_mean(heston, stream):
    n_steps = 2 ** 7
    h = heston.t / n_steps
    draw = simulate_variance(heston, n_steps, stream(204), 100_000)
    se = draw.fine_integral.std(ddof=1) / math.sqrt(draw.fine_integral.size)
    # left rectangles under an increasing mean curve
    bias_bound = h * abs(heston.mean_variance(heston.t, heston.v0) - heston.v0)
    assert abs(draw.fine_integral.mean() - heston.integrated_mean_variance()) <= 4 * se + bias_bound
