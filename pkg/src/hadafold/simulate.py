"""Single-pixel measurement simulation on the Hadamard basis.

The bucket-detector forward model is ``y = A f`` where the rows of ``A`` are
the first M basis patterns of a chosen ordering.  Because those rows are rows
of the natural Hadamard matrix in permuted positions, a whole measurement
vector costs one fast transform plus a gather; no pattern is ever
materialised.

Binary light modulators cannot display -1, so the practical scheme splits
each pattern P into the complementary pair P+ = (1+P)/2 and P- = (1-P)/2,
records both bucket readings and differences them.  Attenuation (optical
density) and detector noise act on the raw readings, never on differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hadafold.core import fwht_in_place
from hadafold.orderings import OrderingPermutation

__all__ = [
    "NOISELESS",
    "MeasurementPlan",
    "MeasurementSet",
    "NoiseSpec",
    "as_scene_image",
    "complementary_split",
    "dither_expand",
    "dsnr",
    "forward_measure",
    "gaussian_sigma_from_snri",
    "measure",
    "measure_complementary",
    "poisson_noise",
]

MODES = ("direct", "complementary_differential")
NOISE_MODELS = ("none", "gaussian", "poisson")

# beyond this intensity the Poisson sampler would lose integer resolution
_POISSON_LAM_MAX = 1e12


def as_scene_image(image) -> np.ndarray:
    """Validate a scene: square, power-of-two side, finite values in [0, 255]."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ValueError("scene image must be a square 2-D array")
    side = img.shape[0]
    if side < 2 or side & (side - 1):
        raise ValueError(f"image side must be a power of two >= 2, got {side}")
    if not np.all(np.isfinite(img)):
        raise ValueError("scene image must be finite")
    if img.min() < 0.0 or img.max() > 255.0:
        raise ValueError("pixel values must lie in [0, 255]")
    return img


@dataclass(frozen=True)
class MeasurementPlan:
    """Which patterns to play, how many, and the detection mode."""

    ordering: OrderingPermutation
    sample_count: int
    mode: str = "complementary_differential"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not 1 <= self.sample_count <= self.ordering.n:
            raise ValueError(
                f"sample_count must be in [1, {self.ordering.n}], got {self.sample_count}"
            )

    @property
    def sampling_ratio(self) -> float:
        return self.sample_count / self.ordering.n


@dataclass(frozen=True)
class NoiseSpec:
    """Detector noise description.

    ``snri_db`` is the illumination signal-to-noise ratio in dB: the noise
    standard deviation is ``mean(scene) / 10**(snri_db / 10)``.  ``od`` is
    the optical density of an attenuator in front of the detector; raw
    readings are scaled by ``10**-od`` before noise is added.
    """

    model: str = "none"
    snri_db: Optional[float] = None
    seed: int = 0
    od: float = 0.0

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.model!r}; expected one of {NOISE_MODELS}")
        if self.model != "none":
            if self.snri_db is None or not math.isfinite(self.snri_db):
                raise ValueError("snri_db must be finite when a noise model is active")
        if not math.isfinite(self.od) or self.od < 0.0:
            raise ValueError("optical density must be finite and non-negative")


NOISELESS = NoiseSpec()


@dataclass
class MeasurementSet:
    """One simulated acquisition.

    ``values`` holds the M measurement values (differences in complementary
    mode).  ``raw_pairs`` is the (M, 2) array of plus/minus bucket readings,
    present only in complementary mode.
    """

    values: np.ndarray
    raw_pairs: Optional[np.ndarray]
    plan: MeasurementPlan
    noise: NoiseSpec


def forward_measure(image, plan: MeasurementPlan) -> np.ndarray:
    """Noiseless projections of the scene onto the plan's first M patterns.

    One transform of the flattened scene yields every natural-order
    coefficient; the plan's rank table then picks the requested M.  Exact
    agreement with per-pattern dot products on integer-valued scenes.
    """
    img = as_scene_image(image)
    if img.size != plan.ordering.n:
        raise ValueError(
            f"image has {img.size} pixels but the ordering covers {plan.ordering.n}"
        )
    flat = img.ravel().copy()
    fwht_in_place(flat)
    return flat[plan.ordering.ranks[: plan.sample_count] - 1]


def complementary_split(pattern) -> tuple[np.ndarray, np.ndarray]:
    """Split a +/-1 pattern into its 0/1 complementary pair (P+, P-).

    P+ lights the +1 cells, P- the -1 cells; P+ - P- reproduces the pattern
    and P+ + P- is all ones.
    """
    p = np.asarray(pattern)
    if not np.all(np.abs(p) == 1):
        raise ValueError("pattern entries must be +1 or -1")
    plus = ((1 + p) // 2).astype(np.int8)
    minus = ((1 - p) // 2).astype(np.int8)
    return plus, minus


def gaussian_sigma_from_snri(image, snri_db: float) -> float:
    """Noise standard deviation implied by an illumination SNR in dB."""
    img = as_scene_image(image)
    mean = float(img.mean())
    if mean <= 0.0:
        raise ValueError("scene mean must be positive to define an illumination SNR")
    if not math.isfinite(snri_db):
        raise ValueError("snri_db must be finite")
    return mean / 10.0 ** (snri_db / 10.0)


def _centered_poisson(rng: np.random.Generator, sigma: float, shape) -> np.ndarray:
    lam = sigma * sigma
    if lam > _POISSON_LAM_MAX:
        raise ValueError(f"poisson intensity {lam:.3g} exceeds sampler limit {_POISSON_LAM_MAX:.0e}")
    if lam == 0.0:
        return np.zeros(shape)
    return rng.poisson(lam, shape).astype(np.float64) - lam


def poisson_noise(sigma_target: float, count: int, seed: int) -> np.ndarray:
    """Zero-mean Poisson counting noise with the requested standard deviation.

    Draws Poisson(lambda) - lambda with lambda = sigma_target**2, so variance
    equals lambda.  A zero sigma yields exact zeros.
    """
    if sigma_target < 0.0 or not math.isfinite(sigma_target):
        raise ValueError("sigma_target must be finite and non-negative")
    if count < 1:
        raise ValueError("count must be positive")
    return _centered_poisson(np.random.default_rng(seed), sigma_target, (count,))


def _noise_draws(noise: NoiseSpec, sigma: float, shape, rng: np.random.Generator) -> np.ndarray:
    if noise.model == "gaussian":
        # scale after drawing so a fixed seed gives proportional noise across sigmas
        return rng.standard_normal(shape) * sigma
    if noise.model == "poisson":
        return _centered_poisson(rng, sigma, shape)
    raise AssertionError(f"no draws defined for model {noise.model!r}")


def measure_complementary(image, plan: MeasurementPlan, noise: NoiseSpec = NOISELESS) -> MeasurementSet:
    """Simulate complementary differential acquisition.

    Raw bucket readings are ``(sum(image) +/- y) / 2`` scaled by the
    attenuation ``10**-od``; each reading receives an independent noise draw
    from a single stream seeded by ``noise.seed`` (rank-major order, plus
    reading before minus), and negative raw intensities clamp to zero.  The
    returned values are the plus-minus differences; with no noise and od = 0
    they equal :func:`forward_measure` exactly.
    """
    img = as_scene_image(image)
    clean = forward_measure(img, plan)
    total = float(img.sum())
    raw = np.empty((plan.sample_count, 2), dtype=np.float64)
    raw[:, 0] = (total + clean) / 2.0
    raw[:, 1] = (total - clean) / 2.0
    transmission = 10.0 ** (-noise.od)
    if noise.od != 0.0:
        raw *= transmission
    if noise.model != "none":
        sigma = gaussian_sigma_from_snri(img, noise.snri_db)
        rng = np.random.default_rng(noise.seed)
        raw += _noise_draws(noise, sigma, raw.shape, rng)
        np.clip(raw, 0.0, None, out=raw)
    return MeasurementSet(values=raw[:, 0] - raw[:, 1], raw_pairs=raw, plan=plan, noise=noise)


def _measure_direct(image, plan: MeasurementPlan, noise: NoiseSpec) -> MeasurementSet:
    img = as_scene_image(image)
    values = forward_measure(img, plan)
    if noise.od != 0.0:
        values = values * 10.0 ** (-noise.od)
    if noise.model != "none":
        sigma = gaussian_sigma_from_snri(img, noise.snri_db)
        rng = np.random.default_rng(noise.seed)
        values = values + _noise_draws(noise, sigma, values.shape, rng)
    return MeasurementSet(values=values, raw_pairs=None, plan=plan, noise=noise)


def measure(image, plan: MeasurementPlan, noise: NoiseSpec = NOISELESS) -> MeasurementSet:
    """Acquire per the plan's mode: complementary differential or direct +/-1 dots."""
    if plan.mode == "complementary_differential":
        return measure_complementary(image, plan, noise)
    return _measure_direct(image, plan, noise)


def dsnr(signal, noise) -> float:
    """Detection SNR in dB: unbiased variance ratio of signal to noise samples.

    Returns +inf when the noise sequence has zero variance, -inf when only
    the signal does.
    """
    s = np.asarray(signal, dtype=np.float64)
    n = np.asarray(noise, dtype=np.float64)
    if s.ndim != 1 or n.ndim != 1 or s.size < 2 or n.size < 2:
        raise ValueError("signal and noise must be 1-D with at least two samples")
    noise_var = float(n.var(ddof=1))
    if noise_var == 0.0:
        return math.inf
    signal_var = float(s.var(ddof=1))
    if signal_var == 0.0:
        return -math.inf
    return 10.0 * math.log10(signal_var / noise_var)


def dither_expand(gray, factor: int, seed: int = 0) -> np.ndarray:
    """Binarise a grayscale image onto a factor x factor superpixel grid.

    Each source pixel with gray value g becomes a factor**2 cell block with
    round(g * factor**2 / 255) ones placed uniformly at random, so the block
    duty cycle tracks g / 255 to within one quantisation step.  Returns a 0/1
    int8 array; the placement stream is seeded for reproducibility.
    """
    img = as_scene_image(gray)
    if factor < 1 or int(factor) != factor:
        raise ValueError("factor must be a positive integer")
    factor = int(factor)
    cells = factor * factor
    ones = np.rint(img * cells / 255.0).astype(np.int64)
    side = img.shape[0]
    out = np.zeros((side * factor, side * factor), dtype=np.int8)
    rng = np.random.default_rng(seed)
    for i in range(side):
        for j in range(side):
            lit = int(ones[i, j])
            if lit == 0:
                continue
            block = np.zeros(cells, dtype=np.int8)
            block[rng.permutation(cells)[:lit]] = 1
            out[i * factor : (i + 1) * factor, j * factor : (j + 1) * factor] = block.reshape(
                factor, factor
            )
    return out
