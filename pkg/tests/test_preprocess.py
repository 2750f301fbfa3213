import numpy as np
import pytest

from datesort.preprocess import (
    CALIBRATED,
    RAW,
    CalibrationReference,
    SpectralReading,
    calibrate_spectral,
    gaussian_kernel,
    gaussian_smooth,
    normalize,
    preprocess_image,
    resize,
)


@pytest.fixture
def ref():
    dark = 100.0 + np.arange(18)
    return CalibrationReference(dark, dark + 1000.0 + 10 * np.arange(18))


# ------------------------------------------------------------------ resize

def test_resize_identity_is_bit_identical():
    img = np.random.default_rng(0).integers(0, 256, (7, 5, 3), dtype=np.uint8)
    out = resize(img, 5, 7)
    assert out.dtype == np.uint8 and np.array_equal(out, img)


@pytest.mark.parametrize("dims", [(1, 1), (3, 9), (64, 64), (100, 37)])
def test_resize_constant_stays_constant(dims):
    img = np.full((13, 17, 3), 77, dtype=np.uint8)
    out = resize(img, *dims)
    assert out.shape == (dims[1], dims[0], 3)
    assert np.all(out == 77)


def test_resize_checkerboard_block_means():
    # at pixel-centre alignment the 2x downsample samples halfway between
    # source centres, so each output is the mean of its 2x2 source block
    board = np.indices((4, 4)).sum(axis=0) % 2
    img = np.repeat(board[:, :, None], 3, axis=2).astype(float)
    img[0, 0] = 0.3  # break the symmetry so the test is not vacuous
    out = resize(img, 2, 2)
    blocks = img.reshape(2, 2, 2, 2, 3).mean(axis=(1, 3))
    assert np.allclose(out, blocks, atol=1e-12)


def test_resize_rejects_zero_target():
    with pytest.raises(ValueError):
        resize(np.zeros((4, 4, 3), np.uint8), 0, 4)


def test_resize_is_idempotent_at_same_size():
    img = np.random.default_rng(1).random((9, 11, 3))
    once = resize(img, 20, 15)
    assert np.array_equal(resize(once, 20, 15), once)


def test_resize_preserves_range():
    img = np.random.default_rng(2).random((10, 10, 3))
    out = resize(img, 23, 7)
    assert out.min() >= img.min() - 1e-12 and out.max() <= img.max() + 1e-12


# --------------------------------------------------------------- normalize

def test_normalize_values():
    assert np.all(normalize(np.zeros((2, 2, 3), np.uint8)) == 0.0)
    assert np.all(normalize(np.full((2, 2, 3), 255, np.uint8)) == 1.0)
    assert normalize(np.full((1, 1, 3), 128, np.uint8))[0, 0, 0] == pytest.approx(0.50196, abs=1e-5)


def test_double_normalization_rejected():
    once = normalize(np.zeros((2, 2, 3), np.uint8))
    with pytest.raises(ValueError, match="double normalization"):
        normalize(once)


# ------------------------------------------------------------------ smooth

def test_smooth_sigma_zero_identity():
    img = np.random.default_rng(3).random((8, 8, 3))
    assert np.array_equal(gaussian_smooth(img, 0.0), img)


def test_smooth_constant_unchanged():
    img = np.full((12, 9, 3), 0.42)
    assert np.allclose(gaussian_smooth(img, 1.7), 0.42, atol=1e-15)


def test_smooth_conserves_interior_impulse_mass():
    img = np.zeros((21, 21, 3))
    img[10, 10] = 1.0
    out = gaussian_smooth(img, 1.0)
    assert abs(out[..., 0].sum() - 1.0) < 1e-9


def test_smooth_kernel_shape():
    k = gaussian_kernel(0.8)
    assert len(k) == 2 * 3 + 1  # radius ceil(2.4) = 3
    assert abs(k.sum() - 1.0) < 1e-15


def test_smooth_never_expands_range():
    img = np.random.default_rng(4).random((16, 16, 3))
    out = gaussian_smooth(img, 1.3)
    assert out.min() >= img.min() - 1e-12 and out.max() <= img.max() + 1e-12


def test_smooth_negative_sigma_rejected():
    with pytest.raises(ValueError):
        gaussian_smooth(np.zeros((3, 3, 3)), -0.1)


def test_preprocess_image_clamps_gain():
    img = np.full((8, 8, 3), 200, np.uint8)
    out = preprocess_image(img, 8, 0.0, gain=2.0)
    assert np.all(out == 1.0)


# ------------------------------------------------------------- calibration

def test_calibration_endpoints_and_midpoint(ref):
    white = calibrate_spectral(SpectralReading(ref.white), ref)
    dark = calibrate_spectral(SpectralReading(ref.dark), ref)
    mid = calibrate_spectral(SpectralReading((ref.dark + ref.white) / 2), ref)
    assert white.kind == CALIBRATED
    assert np.all(white.values == 1.0)
    assert np.all(dark.values == 0.0)
    assert np.allclose(mid.values, 0.5, atol=1e-15)


def test_calibration_clamps(ref):
    hi = calibrate_spectral(SpectralReading(ref.white * 3), ref)
    lo = calibrate_spectral(SpectralReading(ref.dark - 50), ref)
    assert np.all(hi.values == 1.2) and np.all(lo.values == 0.0)


def test_calibration_affine_invariance(ref):
    raw = ref.dark + 0.37 * (ref.white - ref.dark)
    a = calibrate_spectral(SpectralReading(raw), ref).values
    scaled = CalibrationReference(ref.dark * 3.5, ref.white * 3.5)
    b = calibrate_spectral(SpectralReading(raw * 3.5), scaled).values
    assert np.allclose(a, b, atol=1e-12)


def test_calibration_degenerate_reference():
    bad = CalibrationReference(np.ones(18), np.ones(18))
    with pytest.raises(ValueError, match="degenerate reference"):
        calibrate_spectral(SpectralReading(np.ones(18)), bad)


def test_calibration_requires_raw(ref):
    cal = calibrate_spectral(SpectralReading(ref.white), ref)
    with pytest.raises(ValueError):
        calibrate_spectral(cal, ref)


def test_spectral_reading_length_checked():
    with pytest.raises(ValueError):
        SpectralReading(np.ones(17), RAW)
