import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from swisim.core import DepthMap
from swisim.exceptions import DimensionMismatch
from swisim.filters import (FilterKind, FilterSpec, apply_filter,
                            gaussian_filter, joint_bilateral,
                            joint_bilateral_upsample)


def test_gaussian_impulse_normalized():
    img = np.zeros((33, 33))
    img[16, 16] = 1.0
    out = gaussian_filter(img, sigma_px=2.0)
    assert out.sum() == pytest.approx(1.0, abs=1e-9)
    assert out[16, 16] == out.max()


def test_gaussian_constant_preserved():
    out = gaussian_filter(np.full((21, 17), 4.25), sigma_px=3.0)
    assert np.allclose(out, 4.25, atol=1e-12)


def test_gaussian_border_renormalized():
    # without renormalization a corner pixel of a constant image would dim
    out = gaussian_filter(np.full((15, 15), 2.0), sigma_px=4.0)
    assert out[0, 0] == pytest.approx(2.0, abs=1e-12)


def test_gaussian_contracts_noise_variance():
    rng = np.random.default_rng(0)
    noise = rng.normal(0, 1, size=(128, 128))
    out = gaussian_filter(noise, sigma_px=2.0)
    assert out.var() < 0.1 * noise.var()


def test_gaussian_mask_excludes_pixels():
    img = np.ones((9, 9))
    img[4, 4] = 1e9
    mask = np.ones((9, 9), dtype=bool)
    mask[4, 4] = False
    out = gaussian_filter(img, sigma_px=1.5, mask=mask)
    assert np.allclose(out, 1.0, atol=1e-6)


def test_gaussian_zero_sigma_is_identity():
    rng = np.random.default_rng(1)
    img = rng.normal(size=(8, 8))
    assert np.array_equal(gaussian_filter(img, 0.0), img)


@given(sigma=st.floats(0.5, 4.0))
@hyp_settings(max_examples=20)
def test_bilateral_constant_guide_equals_gaussian(sigma):
    rng = np.random.default_rng(42)
    img = rng.uniform(0, 10, size=(24, 24))
    guide = np.full((24, 24), 3.0)
    jb = joint_bilateral(img, guide, sigma_px=sigma, intensity_sigma=0.5)
    g = gaussian_filter(img, sigma_px=sigma)
    assert np.max(np.abs(jb - g)) < 1e-9


def test_bilateral_infinite_intensity_sigma_equals_gaussian():
    rng = np.random.default_rng(5)
    img = rng.uniform(0, 10, size=(16, 16))
    guide = rng.uniform(0, 1, size=(16, 16))
    jb = joint_bilateral(img, guide, sigma_px=2.0, intensity_sigma=np.inf)
    g = gaussian_filter(img, sigma_px=2.0)
    assert np.max(np.abs(jb - g)) < 1e-9


def test_bilateral_preserves_guided_step_edge():
    h, w = 24, 24
    img = np.zeros((h, w))
    img[:, w // 2:] = 1.0
    guide = img * 100.0
    out = joint_bilateral(img, guide, sigma_px=3.0, intensity_sigma=1.0)
    # leakage across the guide edge stays under 1% of the step height
    assert np.max(np.abs(out[:, :w // 2] - 0.0)) < 0.01
    assert np.max(np.abs(out[:, w // 2:] - 1.0)) < 0.01


def test_bilateral_guide_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        joint_bilateral(np.zeros((4, 4)), np.zeros((5, 5)), 1.0, 1.0)


def test_bilateral_mask_excludes_pixels():
    img = np.ones((9, 9))
    img[4, 4] = 1e9
    mask = np.ones((9, 9), dtype=bool)
    mask[4, 4] = False
    out = joint_bilateral(img, np.zeros((9, 9)), sigma_px=1.5,
                          intensity_sigma=1.0, mask=mask)
    assert np.allclose(out, 1.0, atol=1e-6)


def test_upsample_factor_one_equals_bilateral():
    rng = np.random.default_rng(9)
    img = rng.uniform(0, 5, size=(19, 23))
    guide = rng.uniform(0, 1, size=(19, 23))
    jb = joint_bilateral(img, guide, sigma_px=2.3, intensity_sigma=0.4)
    up = joint_bilateral_upsample(DepthMap.full(img), guide, factor=1,
                                  sigma_px=2.3, intensity_sigma=0.4)
    assert up.mask.all()
    assert np.max(np.abs(up.depth - jb)) == 0.0


def test_upsample_constant_map():
    guide = np.zeros((20, 20))
    low = DepthMap.full(np.full((5, 5), 7.0))
    up = joint_bilateral_upsample(low, guide, factor=4, sigma_px=4.0,
                                  intensity_sigma=1.0)
    assert up.mask.all()
    assert np.allclose(up.depth[up.mask], 7.0, atol=1e-12)


def test_upsample_recovers_smooth_ramp():
    yy, xx = np.mgrid[0:32, 0:32]
    ramp = xx * 0.5
    low = DepthMap.full(ramp[::4, ::4])
    up = joint_bilateral_upsample(low, np.zeros((32, 32)), factor=4,
                                  sigma_px=4.0, intensity_sigma=np.inf)
    inner = (slice(4, -4), slice(4, -4))
    assert np.max(np.abs(up.depth[inner] - ramp[inner])) < 1.0


def test_upsample_invalid_samples_masked():
    guide = np.zeros((12, 12))
    depth = np.full((3, 3), 2.0)
    mask = np.zeros((3, 3), dtype=bool)  # nothing valid
    up = joint_bilateral_upsample(DepthMap(depth=depth, mask=mask), guide,
                                  factor=4, sigma_px=2.0, intensity_sigma=1.0)
    assert not up.mask.any()


def test_upsample_shape_contract():
    with pytest.raises(DimensionMismatch):
        joint_bilateral_upsample(DepthMap.full(np.zeros((4, 4))),
                                 np.zeros((20, 20)), factor=4,
                                 sigma_px=2.0, intensity_sigma=1.0)


def test_filter_spec_validation_and_width_convention():
    with pytest.raises(ValueError):
        FilterSpec(kind=FilterKind.GAUSSIAN, spatial_sigma=0.0)
    with pytest.raises(ValueError):
        FilterSpec(kind=FilterKind.JOINT_BILATERAL, spatial_sigma=1.0,
                   intensity_sigma=0.0)
    spec = FilterSpec.from_kernel_width(FilterKind.GAUSSIAN, width_um=21.0)
    assert spec.spatial_sigma == pytest.approx(3.5)
    assert spec.sigma_px == pytest.approx(3.5 / 3.7)


def test_apply_filter_dispatch():
    rng = np.random.default_rng(2)
    img = rng.uniform(size=(10, 10))
    assert np.array_equal(apply_filter(img, None), img)
    assert np.array_equal(
        apply_filter(img, FilterSpec(kind=FilterKind.NONE)), img)
    spec = FilterSpec(kind=FilterKind.GAUSSIAN, spatial_sigma=7.4)
    assert np.allclose(apply_filter(img, spec),
                       gaussian_filter(img, spec.sigma_px))
