import numpy as np
import pytest

from neutral_ldp.config import RuntimeOptions
from neutral_ldp.errors import ConfigurationError
from neutral_ldp.rate.control import Control
from neutral_ldp.rate.events import RareEvent
from neutral_ldp.rate.minimize import minimize_rate, minimize_truncated_rate, rate_lower_bound_scan


@pytest.mark.parametrize("target", [0.5, 1.0, 2.0])
def test_brownian_terminal_target(schilder_setup, target):
    spec, grid, xi, x0 = schilder_setup
    estimate = minimize_rate(spec, xi, x0, RareEvent.terminal_target(target))
    assert estimate.converged
    assert estimate.value == pytest.approx(target ** 2 / 2, abs=1e-3)
    # the minimizer is the straight line to the target
    np.testing.assert_allclose(estimate.argmin.values[:, 0], target * grid.forward_times, atol=1e-2)


def test_brownian_sup_exceed(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    estimate = minimize_rate(spec, xi, x0, RareEvent.sup_exceed(1.0, x0))
    assert estimate.converged
    assert estimate.value == pytest.approx(0.5, abs=1e-3)


def test_rate_grows_with_threshold(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    values = [minimize_rate(spec, xi, x0, RareEvent.sup_exceed(delta, x0)).value for delta in (0.5, 1.0, 2.0)]
    assert values[0] <= values[1] <= values[2]


def test_truncated_rate_agrees_inside_the_ball(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    event = RareEvent.terminal_target(1.0)
    truncated = minimize_truncated_rate(spec, xi, x0, event, R=2.0)
    assert truncated.converged
    assert truncated.value == pytest.approx(minimize_rate(spec, xi, x0, event).value, abs=1e-3)


def test_typical_endpoint_costs_nothing(test1_setup):
    spec, grid, xi, x0 = test1_setup
    estimate = minimize_rate(spec, xi, x0, RareEvent.terminal_target(x0.terminal()))
    assert estimate.converged
    assert estimate.value == 0.0
    np.testing.assert_array_equal(estimate.argmin.values, 0.0)


def test_converged_means_feasible(test1_setup):
    spec, grid, xi, x0 = test1_setup
    event = RareEvent.sup_exceed(0.5, x0, tol=1e-3)
    estimate = minimize_rate(spec, xi, x0, event)
    assert estimate.converged
    assert estimate.residual <= event.tol
    assert estimate.value > 0
    assert len(estimate.stages) == 5
    assert estimate.to_dict()["stages"] == estimate.stages


def test_initial_control_geometry_checked(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    with pytest.raises(ConfigurationError):
        minimize_rate(spec, xi, x0, RareEvent.terminal_target(1.0), init=Control.zero(grid.refine()))


def test_single_restart_is_plain_minimization(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    event = RareEvent.terminal_target(1.0)
    assert rate_lower_bound_scan(spec, xi, x0, event, restarts=1).value == minimize_rate(spec, xi, x0, event).value


def test_more_restarts_never_raise_the_estimate(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    event = RareEvent.terminal_target(1.0)
    values = [rate_lower_bound_scan(spec, xi, x0, event, restarts=r, seed=7).value for r in (1, 2, 4)]
    assert values[0] >= values[1] >= values[2]
    assert values[2] == pytest.approx(0.5, abs=1e-3)


def test_restart_scan_independent_of_threads(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    event = RareEvent.terminal_target(1.0)
    single = rate_lower_bound_scan(spec, xi, x0, event, restarts=3, seed=1, runtime=RuntimeOptions(threads=1))
    pooled = rate_lower_bound_scan(spec, xi, x0, event, restarts=3, seed=1, runtime=RuntimeOptions(threads=3))
    assert single.value == pooled.value


def test_restarts_must_be_positive(schilder_setup):
    spec, grid, xi, x0 = schilder_setup
    with pytest.raises(ConfigurationError):
        rate_lower_bound_scan(spec, xi, x0, RareEvent.terminal_target(1.0), restarts=0)
