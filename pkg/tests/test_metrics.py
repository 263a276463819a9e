import math

import numpy as np
import pytest

from _oracles import mse_double_loop
from hadafold.assets import ramp_composite
from hadafold.metrics import QualityReport, mse, mssim, psnr, quality_report


def natural_image(side: int = 64) -> np.ndarray:
    return ramp_composite(side)


# ---------------------------------------------------------------------------
# mse


def test_mse_of_identical_images_is_zero():
    img = natural_image()
    assert mse(img, img) == 0.0


def test_mse_of_opposite_extremes():
    assert mse(np.zeros((8, 8)), np.full((8, 8), 255.0)) == 255.0**2


def test_mse_matches_double_loop():
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 255, (16, 16))
    b = rng.uniform(0, 255, (16, 16))
    assert mse(a, b) == pytest.approx(mse_double_loop(a, b), rel=1e-13)


def test_mse_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        mse(np.zeros((8, 8)), np.zeros((8, 4)))
    with pytest.raises(ValueError):
        mse(np.zeros(64), np.zeros(64))


# ---------------------------------------------------------------------------
# psnr


def test_psnr_at_full_scale_error_is_zero_db():
    assert psnr(np.zeros((8, 8)), np.full((8, 8), 255.0)) == pytest.approx(0.0)


def test_psnr_of_unit_mse():
    ref = np.zeros((8, 8))
    test = np.ones((8, 8))
    assert psnr(ref, test) == pytest.approx(10.0 * math.log10(255.0**2))


def test_psnr_identical_images_is_infinite():
    img = natural_image()
    assert psnr(img, img) == math.inf


def test_psnr_decreases_as_mse_grows():
    ref = np.full((8, 8), 100.0)
    values = [psnr(ref, ref + delta) for delta in (1.0, 5.0, 20.0, 80.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_psnr_is_symmetric():
    rng = np.random.default_rng(1)
    a = rng.uniform(0, 255, (12, 12))
    b = rng.uniform(0, 255, (12, 12))
    assert psnr(a, b) == psnr(b, a)


# ---------------------------------------------------------------------------
# mssim


def test_mssim_identical_images_is_exactly_one():
    img = natural_image()
    assert mssim(img, img) == 1.0


def test_mssim_penalizes_constant_offset():
    img = natural_image()
    value = mssim(img, img + 25.0)
    assert 0.0 < value < 1.0


def test_mssim_is_symmetric():
    rng = np.random.default_rng(2)
    a = rng.uniform(0, 255, (32, 32))
    b = np.clip(a + rng.normal(0, 20, a.shape), 0, 255)
    assert mssim(a, b) == pytest.approx(mssim(b, a), abs=1e-12)


def test_mssim_not_invariant_under_common_shift():
    # the luminance term compares means relatively, so sliding both images
    # up the gray scale changes the score of any pair with unequal means
    a = np.full((16, 16), 10.0)
    b = np.full((16, 16), 40.0)
    low = mssim(a, b)
    high = mssim(a + 150.0, b + 150.0)
    assert abs(low - high) > 0.05


def test_inversion_scores_below_matched_noise():
    # structural inversion is worse than unstructured noise of equal energy
    img = natural_image()
    inverted = 255.0 - img
    target = mse(img, inverted)
    rng = np.random.default_rng(3)
    noise = rng.standard_normal(img.shape)
    noise *= math.sqrt(target / np.mean(noise * noise))
    noisy = img + noise
    assert mse(img, noisy) == pytest.approx(target, rel=1e-12)
    assert mssim(img, inverted) < mssim(img, noisy)


def test_mssim_window_must_fit():
    with pytest.raises(ValueError):
        mssim(np.zeros((8, 8)), np.zeros((8, 8)))


def test_mssim_parameter_overrides():
    img = natural_image(32)
    blurred = np.clip(img + np.random.default_rng(4).normal(0, 12, img.shape), 0, 255)
    default = mssim(img, blurred)
    small_window = mssim(img, blurred, window_size=7, sigma=1.0)
    assert default != small_window
    assert 0.0 < small_window <= 1.0


def test_mssim_bounded_above_by_one():
    rng = np.random.default_rng(5)
    for _ in range(5):
        a = rng.uniform(0, 255, (16, 16))
        b = rng.uniform(0, 255, (16, 16))
        assert mssim(a, b) <= 1.0


# ---------------------------------------------------------------------------
# report bundle


def test_quality_report_is_consistent():
    img = natural_image()
    degraded = np.clip(img + np.random.default_rng(6).normal(0, 10, img.shape), 0, 255)
    report = quality_report(img, degraded)
    assert isinstance(report, QualityReport)
    assert report.mse == mse(img, degraded)
    assert report.psnr_db == psnr(img, degraded)
    assert report.mssim == mssim(img, degraded)
    assert report.psnr_db == pytest.approx(10.0 * math.log10(255.0**2 / report.mse))
