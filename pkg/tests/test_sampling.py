import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circlebody.experiments import angle_trajectory
from circlebody.models import ModelSpec
from circlebody.sampling import (
    SamplingError,
    draw_safe,
    min_pairwise_sin,
    random_angle_state,
    trajectory_margin,
)


def test_min_pairwise_sin_examples():
    assert min_pairwise_sin([0.3]) == math.inf
    assert min_pairwise_sin([0.0, math.pi / 2]) == pytest.approx(1.0)
    # antipodal particles are as singular as coincident ones
    assert min_pairwise_sin([0.0, math.pi, 1.0]) < 1e-15


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.floats(0.01, 0.3))
def test_random_states_respect_separation(seed, n, sep):
    s = random_angle_state(np.random.default_rng(seed), n, min_separation=sep, velocity_spread=0.5)
    assert min_pairwise_sin(s.theta) > sep
    assert np.all(np.abs(s.theta) <= math.pi)
    assert np.all(np.abs(s.theta_dot) <= 0.5)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.5))
def test_random_states_respect_tan_margin(seed, margin):
    s = random_angle_state(np.random.default_rng(seed), 3, min_separation=0.05, tan_margin=margin)
    assert np.all(np.abs(np.cos(s.theta)) > margin)


def test_spread_and_center():
    s = random_angle_state(np.random.default_rng(1), 4, angular_spread=0.5, min_separation=0.01, center=2.0)
    assert np.all(np.abs(s.theta - 2.0) <= 0.25)


def test_draws_are_reproducible():
    a = random_angle_state(np.random.default_rng(7), 3)
    b = random_angle_state(np.random.default_rng(7), 3)
    np.testing.assert_array_equal(a.theta, b.theta)
    np.testing.assert_array_equal(a.theta_dot, b.theta_dot)


def test_impossible_separation():
    # six particles cannot all be pairwise |sin| > 0.9 apart
    with pytest.raises(SamplingError):
        random_angle_state(np.random.default_rng(0), 6, min_separation=0.9, max_draws=50)


def test_nonpositive_separation_rejected():
    with pytest.raises(ValueError):
        random_angle_state(np.random.default_rng(0), 2, min_separation=0.0)


@pytest.mark.parametrize(
    "model",
    [ModelSpec.sutherland(1.0), ModelSpec.many_body([1.0, 1.5, 0.7], [0.3, -0.2, 0.5]), ModelSpec.isochronous_tan(1.0)],
    ids=["sutherland", "many_body", "isochronous_tan"],
)
def test_draw_safe_keeps_margin_along_the_path(model):
    s = draw_safe(model, 3, np.random.default_rng(3), 2.0, angular_spread=2.0, path_margin=0.05)
    traj = angle_trajectory(model, s, np.linspace(0.0, 2.0, 201))
    # the screen samples 101 points at looser tolerance; a denser check stays close to its margin
    assert trajectory_margin(model, traj) > 0.04


def test_draw_safe_gives_up():
    with pytest.raises(SamplingError):
        draw_safe(ModelSpec.sutherland(1.0), 3, np.random.default_rng(0), 1.0, path_margin=2.0, max_draws=3)
