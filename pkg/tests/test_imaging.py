import numpy as np
import pytest
from numpy.testing import assert_allclose

from hazebench import apply_haze, depth_from_transmission, invert_haze, luminance, transmission_from_depth
from hazebench.errors import DomainError, ParameterError, ShapeError
from hazebench.imaging import linear_to_srgb, srgb_to_linear


def test_apply_haze_hand_value():
    # J = I*t + A*(1-t): (0.2,0.4,0.6), t=0.5, A=1 -> (0.6,0.7,0.8)
    img = np.full((2, 2, 3), (0.2, 0.4, 0.6))
    hazy = apply_haze(img, 0.5, (1.0, 1.0, 1.0))
    assert_allclose(hazy[0, 0], [0.6, 0.7, 0.8])


def test_invert_haze_hand_value():
    hazy = np.full((1, 1, 3), 0.9)
    out = invert_haze(hazy, 0.5, (1.0, 1.0, 1.0))
    assert_allclose(out[0, 0], [0.8, 0.8, 0.8])


def test_round_trip_exact_when_t_above_floor():
    rng = np.random.default_rng(5)
    for _ in range(20):
        img = rng.uniform(0, 1, (6, 7, 3))
        t = rng.uniform(0.1, 1.0, (6, 7))
        a = tuple(rng.uniform(0.5, 1.0, 3))
        back = invert_haze(apply_haze(img, t, a), t, a)
        assert_allclose(back, img, atol=1e-12)


def test_invert_floors_small_transmission():
    hazy = np.full((1, 1, 3), 0.2)
    # t = 0.01 floored to 0.1: (0.2-1)/0.1+1 = -7 -> clamped to 0
    out = invert_haze(hazy, 0.01, (1.0, 1.0, 1.0), t_floor=0.1)
    assert_allclose(out, 0.0)


def test_invert_output_clamped_to_unit_range():
    hazy = np.full((1, 1, 3), 1.0)
    out = invert_haze(hazy, 0.5, (0.5, 0.5, 0.5))
    assert out.max() <= 1.0


def test_transmission_from_depth_scalar_and_map():
    assert transmission_from_depth(7.0, 0.1) == pytest.approx(np.exp(-0.7))
    depth = np.array([[1.0, 2.0], [3.0, np.nan]])
    t = transmission_from_depth(depth, 0.5)
    assert_allclose(t[0, 0], np.exp(-0.5))
    assert np.isnan(t[1, 1])


def test_depth_transmission_round_trip():
    rng = np.random.default_rng(11)
    d = rng.uniform(0.5, 30.0, 50)
    beta = 0.08357
    assert_allclose(depth_from_transmission(transmission_from_depth(d, beta), beta), d)


def test_negative_depth_rejected():
    with pytest.raises(DomainError):
        transmission_from_depth(-1.0, 0.1)


def test_zero_beta_rejected():
    with pytest.raises(ParameterError):
        transmission_from_depth(5.0, 0.0)


def test_transmission_out_of_range_rejected():
    img = np.zeros((2, 2, 3))
    with pytest.raises(DomainError):
        apply_haze(img, 1.5, (1, 1, 1))
    with pytest.raises(DomainError):
        apply_haze(img, -0.1, (1, 1, 1))


def test_airlight_validation():
    img = np.zeros((2, 2, 3))
    with pytest.raises(ParameterError):
        apply_haze(img, 0.5, (0.0, 1.0, 1.0))
    with pytest.raises(ParameterError):
        apply_haze(img, 0.5, (1.0, 1.1, 1.0))


def test_image_shape_validation():
    with pytest.raises(ShapeError):
        apply_haze(np.zeros((4, 4)), 0.5, (1, 1, 1))
    with pytest.raises(ShapeError):
        apply_haze(np.zeros((4, 4, 3)), np.ones((3, 3)), (1, 1, 1))


def test_luminance_weights():
    img = np.zeros((1, 3, 3))
    img[0, 0] = (1, 0, 0)
    img[0, 1] = (0, 1, 0)
    img[0, 2] = (0, 0, 1)
    assert_allclose(luminance(img)[0], [0.299, 0.587, 0.114])


def test_srgb_round_trip():
    v = np.linspace(0, 1, 64)
    assert_allclose(linear_to_srgb(srgb_to_linear(v)), v, atol=1e-12)
