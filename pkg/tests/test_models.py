import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neutral_ldp.config import AuditOptions
from neutral_ldp.core.grid import TimeGrid, constant_initial, initial_from_nodes
from neutral_ldp.core.laws import EmpiricalLaw
from neutral_ldp.errors import ConfigurationError, DomainError
from neutral_ldp.models.audit import SegmentSampler, audit_assumptions
from neutral_ldp.models.builtin import (
    SCHILDER,
    TEST_1,
    TEST_1_BOUNDED,
    ZERO,
    available,
    builtin,
    make_delay_model,
    register,
)
from neutral_ldp.models.spec import chi_R, chi_R_of_norms
from neutral_ldp.models.truncation import truncate

GRID = TimeGrid(tau=0.25, T=1.0, h=0.0625)


@pytest.mark.parametrize("offset, expected", [(0.0, 1.0), (-1.0, 1.0), (0.5, 0.5), (2.0, 0.0)])
def test_chi_R_branches(offset, expected):
    R = 2.0
    seg = constant_initial(GRID, R + offset)
    assert chi_R(seg, R) == pytest.approx(expected)


def test_chi_R_of_norms_vectorized():
    np.testing.assert_allclose(chi_R_of_norms([0.0, 1.0, 1.25, 3.0], 1.0), [1.0, 1.0, 0.75, 0.0])


def test_builtin_coefficients():
    spec = builtin(TEST_1)
    xi = initial_from_nodes(GRID, [2.0, 0.0, 0.0, 0.0, 1.0])
    law = EmpiricalLaw(np.array([[[0.0]] * 5, [[0.0]] * 4 + [[3.0]]]))
    np.testing.assert_allclose(spec.D(xi), [0.5])
    np.testing.assert_allclose(spec.b(xi, law), [-1.0 + 0.5 * 1.5])
    np.testing.assert_allclose(spec.sigma(xi, law), [[0.3 + 0.1 * np.sin(1.0)]])
    assert spec.alpha == 0.25
    assert not spec.head_dependent


def test_schilder_is_brownian():
    spec = builtin(SCHILDER)
    xi = constant_initial(GRID, 4.0)
    law = EmpiricalLaw.dirac(xi)
    np.testing.assert_array_equal(spec.D(xi), [0.0])
    np.testing.assert_array_equal(spec.b(xi, law), [0.0])
    np.testing.assert_array_equal(spec.sigma(xi, law), [[1.0]])


def test_bounded_drift_stays_below_L5(rng):
    spec = builtin(TEST_1_BOUNDED)
    sampler = SegmentSampler(dim=1, window=GRID.window, amplitude=50.0)
    windows = sampler.segments(rng, 10_000)
    law = sampler.law(rng, 8)
    assert np.max(np.abs(spec.drift(windows, law))) <= spec.L5
    assert spec.L5 == 4.0


def test_L2_is_derived():
    spec = make_delay_model(alpha=0.5, L=0.5, L1=0.5)
    assert spec.L2 == pytest.approx(max(0.5 + 1.5 ** 2, 1.0))


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
def test_alpha_outside_unit_interval_rejected(alpha):
    with pytest.raises(ConfigurationError):
        make_delay_model(alpha=alpha)


def test_unknown_model():
    with pytest.raises(ConfigurationError):
        builtin("NO-SUCH-MODEL")


def test_register_custom_model():
    spec = make_delay_model("custom-registered", neutral_weight=0.1)
    register(spec, replace=True)
    assert builtin("custom-registered") is spec
    assert "custom-registered" in available()
    with pytest.raises(ConfigurationError):
        register(make_delay_model(TEST_1))


def test_truncation_inside_ball_is_identity(rng):
    spec = builtin(TEST_1)
    truncated = truncate(spec, 3.0)
    windows = SegmentSampler(dim=1, window=GRID.window, amplitude=3.0).segments(rng, 200)
    law = EmpiricalLaw(windows[:4])
    np.testing.assert_array_equal(truncated.drift(windows, law), spec.drift(windows, law))
    np.testing.assert_array_equal(truncated.diffusion(windows, law), spec.diffusion(windows, law))


def test_truncation_outside_ball_vanishes():
    spec = builtin(TEST_1)
    truncated = truncate(spec, 1.0)
    windows = np.full((3, GRID.window, 1), 2.0)
    windows[1, 0, 0] = -5.0
    law = EmpiricalLaw(windows[:1])
    assert np.all(truncated.drift(windows, law) == 0.0)
    assert np.all(truncated.diffusion(windows, law) == 0.0)


def test_truncation_constants():
    spec = builtin(TEST_1)
    truncated = truncate(spec, 2.0)
    assert truncated.alpha == spec.alpha
    assert np.isfinite(truncated.L5) and truncated.L5 > 0
    assert truncated.L >= spec.L
    assert truncated.name == "TEST-1@R=2"


def test_truncated_zero_model_is_zero(rng):
    truncated = truncate(builtin(ZERO), 1.5)
    windows = rng.normal(size=(10, GRID.window, 1))
    law = EmpiricalLaw(windows[:3])
    assert np.all(truncated.drift(windows, law) == 0.0)
    assert np.all(truncated.diffusion(windows, law) == 0.0)
    assert truncated.L5 == 0.0


def test_negative_truncation_level():
    with pytest.raises(DomainError):
        truncate(builtin(TEST_1), -1.0)


@settings(max_examples=100, deadline=None)
@given(
    arrays(np.float64, (GRID.window,), elements=st.floats(-20, 20)),
    arrays(np.float64, (GRID.window,), elements=st.floats(-20, 20)),
    st.floats(0.0, 10.0),
)
def test_chi_R_is_1_lipschitz(a, b, R):
    gap = np.max(np.abs(a - b))
    assert abs(chi_R(initial_from_nodes(GRID, a), R) - chi_R(initial_from_nodes(GRID, b), R)) <= gap + 1e-12


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([TEST_1, TEST_1_BOUNDED, SCHILDER]), st.sampled_from([0.0, 0.5, 1.0, 2.0, 4.0, 8.0]))
def test_truncation_keeps_audited_conditions(name, R):
    spec = builtin(name)
    assert audit_assumptions(spec, trials=400).passed
    report = audit_assumptions(truncate(spec, R), trials=400)
    assert report.passed, report.failures()


def test_ball_sampler_reaches_beyond_the_amplitude(rng):
    sampler = SegmentSampler(dim=1, window=GRID.window, amplitude=5.0)
    norms = np.max(np.abs(sampler.ball(rng, 2000, 9.0)), axis=(1, 2))
    assert np.all(norms <= 9.0 + 1e-12)
    assert norms.max() > 8.5
    assert sampler.amplitude == 5.0


def test_truncation_bound_covers_the_whole_ball():
    # |b| at a window of sup-norm 8 against a law with head mean -5
    spec = builtin(TEST_1)
    window = np.full((1, AuditOptions().window, 1), 8.0)
    law = EmpiricalLaw(np.full((1, AuditOptions().window, 1), -5.0))
    assert abs(spec.drift(window, law)[0, 0]) == 10.5
    assert truncate(spec, 8.0).L5 >= 10.5
