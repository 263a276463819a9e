import math

import numpy as np
import pytest

from _oracles import dense_hadamard
from hadafold.core import history_to_pattern, serial_to_history
from hadafold.orderings import SCHEMES, get_ordering
from hadafold.simulate import (
    NOISELESS,
    MeasurementPlan,
    MeasurementSet,
    NoiseSpec,
    as_scene_image,
    complementary_split,
    dither_expand,
    dsnr,
    forward_measure,
    gaussian_sigma_from_snri,
    measure,
    measure_complementary,
    poisson_noise,
)


def random_image(side: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(side, side)).astype(np.float64)


def plan_for(scheme: str, k: int, count: int, mode: str = "complementary_differential"):
    return MeasurementPlan(get_ordering(scheme, k), count, mode=mode)


# ---------------------------------------------------------------------------
# scene validation


def test_scene_must_be_square_power_of_two():
    with pytest.raises(ValueError):
        as_scene_image(np.zeros((4, 8)))
    with pytest.raises(ValueError):
        as_scene_image(np.zeros((6, 6)))
    with pytest.raises(ValueError):
        as_scene_image(np.zeros(16))


def test_scene_value_range_enforced():
    with pytest.raises(ValueError):
        as_scene_image(np.full((4, 4), -1.0))
    with pytest.raises(ValueError):
        as_scene_image(np.full((4, 4), 256.0))
    with pytest.raises(ValueError):
        as_scene_image(np.full((4, 4), np.nan))


def test_plan_validation():
    ordering = get_ordering("WH", 4)
    with pytest.raises(ValueError):
        MeasurementPlan(ordering, 0)
    with pytest.raises(ValueError):
        MeasurementPlan(ordering, 17)
    with pytest.raises(ValueError):
        MeasurementPlan(ordering, 4, mode="telepathic")
    assert MeasurementPlan(ordering, 4).sampling_ratio == 0.25


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(model="salt-and-pepper")
    with pytest.raises(ValueError):
        NoiseSpec(model="gaussian")  # snri_db required
    with pytest.raises(ValueError):
        NoiseSpec(model="gaussian", snri_db=math.inf)
    with pytest.raises(ValueError):
        NoiseSpec(od=-0.5)


# ---------------------------------------------------------------------------
# noiseless forward model


def test_rank_one_measures_image_sum():
    img = random_image(8)
    values = forward_measure(img, plan_for("CC", 6, 1))
    assert values[0] == pytest.approx(img.sum())


def test_constant_image_projects_to_zero_beyond_rank_one():
    img = np.full((8, 8), 37.0)
    values = forward_measure(img, plan_for("SE", 6, 64))
    assert values[0] == pytest.approx(37.0 * 64)
    assert np.all(values[1:] == 0.0)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_forward_measure_matches_dense_oracle(scheme):
    k = 6
    img = random_image(8, seed=3)
    plan = plan_for(scheme, k, 64)
    dense_rows = dense_hadamard(k)[plan.ordering.ranks - 1]
    expected = dense_rows @ img.ravel()
    assert np.array_equal(forward_measure(img, plan), expected)


def test_forward_measure_size_mismatch():
    with pytest.raises(ValueError):
        forward_measure(random_image(8), plan_for("NA", 4, 4))


# ---------------------------------------------------------------------------
# complementary split


def test_split_identities_on_random_serials():
    rng = np.random.default_rng(1)
    for serial in rng.integers(1, 257, size=10):
        pattern = history_to_pattern(serial_to_history(int(serial), 8))
        plus, minus = complementary_split(pattern)
        assert np.array_equal(plus + minus, np.ones_like(plus))
        assert np.array_equal(plus - minus, pattern)
        assert set(np.unique(plus)) <= {0, 1}


def test_split_of_all_ones():
    plus, minus = complementary_split(np.ones((4, 4), dtype=np.int8))
    assert plus.sum() == 16 and minus.sum() == 0


def test_split_halves_any_zero_sum_pattern():
    # every basis pattern beyond the first lights exactly half its cells
    pattern = history_to_pattern(serial_to_history(6, 4))
    plus, _ = complementary_split(pattern)
    assert plus.sum() == 8


def test_split_rejects_non_sign_patterns():
    with pytest.raises(ValueError):
        complementary_split(np.array([[1, 0], [1, -1]]))


# ---------------------------------------------------------------------------
# differential acquisition


def test_noiseless_differential_equals_forward():
    img = random_image(8, seed=5)
    plan = plan_for("RD", 6, 40)
    ms = measure_complementary(img, plan)
    assert np.array_equal(ms.values, forward_measure(img, plan))
    assert ms.raw_pairs.shape == (40, 2)
    assert np.all(ms.raw_pairs >= 0.0)


def test_raw_pairs_are_bucket_readings():
    img = random_image(4, seed=2)
    plan = plan_for("WH", 4, 16)
    ms = measure_complementary(img, plan)
    total = img.sum()
    assert np.allclose(ms.raw_pairs[:, 0] + ms.raw_pairs[:, 1], total)
    assert np.allclose(ms.raw_pairs[:, 0] - ms.raw_pairs[:, 1], ms.values)


def test_direct_mode_has_no_raw_pairs():
    img = random_image(4)
    ms = measure(img, plan_for("NA", 4, 8, mode="direct"))
    assert ms.raw_pairs is None
    assert np.array_equal(ms.values, forward_measure(img, ms.plan))


def test_od_three_scales_raw_readings_by_one_thousandth():
    img = random_image(8, seed=7)
    plan = plan_for("CC", 6, 20)
    clean = measure_complementary(img, plan)
    dimmed = measure_complementary(img, plan, NoiseSpec(od=3.0))
    assert np.allclose(dimmed.raw_pairs, clean.raw_pairs * 1e-3, rtol=1e-12)
    assert np.allclose(dimmed.values, clean.values * 1e-3, rtol=1e-12, atol=1e-12)


def test_attenuation_composes_additively():
    img = random_image(8, seed=8)
    plan = plan_for("OR", 6, 12)
    once = measure_complementary(img, plan, NoiseSpec(od=1.25)).values
    twice = measure_complementary(img, plan, NoiseSpec(od=0.75)).values * 10.0 ** (-0.5)
    combined = measure_complementary(img, plan, NoiseSpec(od=1.25)).values
    assert np.allclose(once, combined, rtol=0)
    assert np.allclose(twice, combined, rtol=1e-12)


def test_same_seed_reproduces_measurements_exactly():
    img = random_image(8, seed=9)
    plan = plan_for("WH", 6, 32)
    spec = NoiseSpec(model="gaussian", snri_db=12.0, seed=77)
    first = measure_complementary(img, plan, spec)
    second = measure_complementary(img, plan, spec)
    assert np.array_equal(first.values, second.values)
    assert np.array_equal(first.raw_pairs, second.raw_pairs)


def test_different_seeds_differ():
    img = random_image(8, seed=9)
    plan = plan_for("WH", 6, 32)
    a = measure_complementary(img, plan, NoiseSpec(model="gaussian", snri_db=12.0, seed=1))
    b = measure_complementary(img, plan, NoiseSpec(model="gaussian", snri_db=12.0, seed=2))
    assert not np.array_equal(a.values, b.values)


def test_raw_readings_clamp_at_zero():
    # heavy attenuation + loud noise drives some raw intensities negative
    img = random_image(8, seed=4)
    plan = plan_for("NA", 6, 30)
    spec = NoiseSpec(model="gaussian", snri_db=-10.0, od=4.0, seed=3)
    ms = measure_complementary(img, plan, spec)
    assert np.all(ms.raw_pairs >= 0.0)
    assert np.any(ms.raw_pairs == 0.0)


def test_direct_mode_values_are_not_clamped():
    img = random_image(8, seed=4)
    plan = plan_for("NA", 6, 30, mode="direct")
    spec = NoiseSpec(model="gaussian", snri_db=-10.0, od=4.0, seed=3)
    ms = measure(img, plan, spec)
    assert np.any(ms.values < 0.0)


# ---------------------------------------------------------------------------
# noise generators


def test_sigma_worked_values():
    img = np.full((4, 4), 100.0)
    assert gaussian_sigma_from_snri(img, 10.0) == pytest.approx(10.0)
    assert gaussian_sigma_from_snri(img, 0.0) == pytest.approx(100.0)


def test_sigma_requires_positive_mean():
    with pytest.raises(ValueError):
        gaussian_sigma_from_snri(np.zeros((4, 4)), 10.0)


def test_gaussian_empirical_std_tracks_sigma():
    img = np.full((4, 4), 100.0)
    sigma = gaussian_sigma_from_snri(img, 10.0)
    draws = np.random.default_rng(0).standard_normal(100_000) * sigma
    assert abs(draws.std() - sigma) / sigma < 0.02


def test_poisson_variance_matches_target():
    draws = poisson_noise(5.0, 100_000, seed=0)
    assert abs(draws.var() - 25.0) / 25.0 < 0.03
    assert abs(draws.mean()) < 0.1


def test_poisson_zero_sigma_is_silent():
    assert np.all(poisson_noise(0.0, 100, seed=0) == 0.0)


def test_poisson_is_seed_deterministic():
    assert np.array_equal(poisson_noise(3.0, 50, seed=5), poisson_noise(3.0, 50, seed=5))


def test_poisson_guards_against_overflow():
    with pytest.raises(ValueError):
        poisson_noise(1e7, 10, seed=0)
    with pytest.raises(ValueError):
        poisson_noise(-1.0, 10, seed=0)
    with pytest.raises(ValueError):
        poisson_noise(1.0, 0, seed=0)


def test_poisson_measurements_run_end_to_end():
    img = random_image(8, seed=11)
    plan = plan_for("CC", 6, 16)
    ms = measure_complementary(img, plan, NoiseSpec(model="poisson", snri_db=20.0, seed=2))
    assert ms.values.shape == (16,)
    assert not np.array_equal(ms.values, forward_measure(img, plan))


# ---------------------------------------------------------------------------
# detection SNR


def test_dsnr_equal_variances_is_zero_db():
    rng = np.random.default_rng(0)
    base = rng.standard_normal(4000)
    assert dsnr(base, base.copy()) == pytest.approx(0.0)


def test_dsnr_hundredfold_variance_is_twenty_db():
    rng = np.random.default_rng(1)
    noise = rng.standard_normal(4000)
    assert dsnr(noise * 10.0, noise) == pytest.approx(20.0)


def test_dsnr_sentinels_and_validation():
    assert dsnr([1.0, 2.0, 3.0], [5.0, 5.0, 5.0]) == math.inf
    assert dsnr([5.0, 5.0], [1.0, 2.0]) == -math.inf
    with pytest.raises(ValueError):
        dsnr([1.0], [1.0, 2.0])


def test_dsnr_decreases_with_snri():
    img = random_image(16, seed=13)
    plan = plan_for("CC", 8, 64)
    clean = measure_complementary(img, plan).values
    levels = []
    for snri in (25.0, 15.0, 5.0):
        noisy = measure_complementary(
            img, plan, NoiseSpec(model="gaussian", snri_db=snri, seed=6)
        ).values
        levels.append(dsnr(clean, noisy - clean))
    assert all(math.isfinite(v) for v in levels)
    assert levels[0] > levels[1] > levels[2]


# ---------------------------------------------------------------------------
# dithered binary display


def test_dither_zero_gray_gives_zero_block():
    out = dither_expand(np.zeros((4, 4)), factor=3)
    assert out.shape == (12, 12)
    assert not out.any()


def test_dither_full_gray_fills_every_cell():
    out = dither_expand(np.full((4, 4), 255.0), factor=6)
    assert out.shape == (24, 24)
    assert out.sum() == 16 * 36
    assert np.all(out == 1)


def test_dither_ones_count_is_quantized_gray():
    img = random_image(8, seed=17)
    factor = 4
    out = dither_expand(img, factor, seed=1)
    expected = np.rint(img * factor * factor / 255.0)
    for i in range(8):
        for j in range(8):
            block = out[i * factor : (i + 1) * factor, j * factor : (j + 1) * factor]
            assert block.sum() == expected[i, j]


def test_dither_preserves_mean_within_one_step():
    img = random_image(8, seed=19)
    factor = 5
    out = dither_expand(img, factor, seed=2)
    step = 255.0 / (factor * factor)
    assert abs(out.mean() * 255.0 - img.mean()) <= step


def test_dither_is_seed_deterministic():
    img = random_image(4, seed=21)
    assert np.array_equal(dither_expand(img, 3, seed=9), dither_expand(img, 3, seed=9))
    assert not np.array_equal(dither_expand(img, 3, seed=9), dither_expand(img, 3, seed=10))


def test_dither_rejects_bad_factor():
    with pytest.raises(ValueError):
        dither_expand(np.zeros((4, 4)), factor=0)
