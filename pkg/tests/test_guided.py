import numpy as np
import pytest
from numpy.testing import assert_allclose

from hazebench import GuidedFilterConfig, guided_filter
from hazebench.errors import ParameterError, ShapeError
from hazebench.guided import box_mean

from oracles import box_mean_brute, guided_filter_brute


def test_box_mean_matches_brute_force():
    rng = np.random.default_rng(0)
    for radius in (1, 2, 4):
        values = rng.uniform(0, 1, (11, 9))
        assert_allclose(box_mean(values, radius), box_mean_brute(values, radius), atol=1e-12)


def test_box_mean_radius_zero_is_identity():
    values = np.random.default_rng(1).uniform(0, 1, (5, 5))
    assert_allclose(box_mean(values, 0), values)


def test_guided_filter_matches_brute_force():
    rng = np.random.default_rng(2)
    for radius, eps in ((1, 1e-3), (3, 1e-2), (5, 1e-4)):
        guide = rng.uniform(0, 1, (14, 10))
        src = rng.uniform(0, 1, (14, 10))
        got = guided_filter(guide, src, radius, eps)
        want = guided_filter_brute(guide, src, radius, eps)
        assert_allclose(got, want, atol=1e-10)


def test_guided_filter_preserves_constant_source():
    rng = np.random.default_rng(3)
    guide = rng.uniform(0, 1, (12, 12))
    src = np.full((12, 12), 0.4)
    assert_allclose(guided_filter(guide, src, 4, 1e-3), src, atol=1e-10)


def test_guided_filter_follows_guide_edges():
    # a sharp guide edge survives; smoothing a noisy src toward it
    guide = np.zeros((10, 10))
    guide[:, 5:] = 1.0
    rng = np.random.default_rng(4)
    src = guide + rng.normal(0, 0.05, guide.shape)
    out = guided_filter(guide, src, 3, 1e-4)
    left, right = out[:, :4].mean(), out[:, 6:].mean()
    assert right - left > 0.8


def test_shape_mismatch_rejected():
    with pytest.raises(ShapeError):
        guided_filter(np.zeros((4, 4)), np.zeros((4, 5)), 1, 1e-3)


def test_config_validation():
    with pytest.raises(ParameterError):
        GuidedFilterConfig(radius=-1)
    with pytest.raises(ParameterError):
        GuidedFilterConfig(epsilon=0.0)
