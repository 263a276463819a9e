"""Reference-based image quality metrics on the 8-bit scale."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["QualityReport", "mse", "mssim", "psnr", "quality_report"]

_PEAK = 255.0


class QualityReport(NamedTuple):
    mse: float
    psnr_db: float
    mssim: float


def _pair(reference, test):
    ref = np.asarray(reference, dtype=np.float64)
    img = np.asarray(test, dtype=np.float64)
    if ref.shape != img.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {img.shape}")
    if ref.ndim != 2:
        raise ValueError("metrics expect 2-D images")
    return ref, img


def mse(reference, test) -> float:
    """Mean squared pixel error."""
    ref, img = _pair(reference, test)
    diff = ref - img
    return float(np.mean(diff * diff))


def psnr(reference, test) -> float:
    """Peak signal-to-noise ratio in dB against a 255 peak; +inf for identical images."""
    err = mse(reference, test)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(_PEAK * _PEAK / err)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords * coords) / (2.0 * sigma * sigma))
    window = np.outer(g, g)
    return window / window.sum()


def mssim(reference, test, window_size: int = 11, sigma: float = 1.5) -> float:
    """Mean structural similarity with a Gaussian-weighted sliding window.

    Local means, variances and covariance are taken under an 11x11 Gaussian
    window (sigma 1.5 by default) at every fully-valid position, stabilised
    by C1 = (0.01 * 255)**2 and C2 = (0.03 * 255)**2, and the local indices
    are averaged.  Identical images score exactly 1.
    """
    ref, img = _pair(reference, test)
    if min(ref.shape) < window_size:
        raise ValueError(f"images must be at least {window_size} pixels per side")
    c1 = (0.01 * _PEAK) ** 2
    c2 = (0.03 * _PEAK) ** 2
    w = _gaussian_window(window_size, sigma)

    ref_windows = sliding_window_view(ref, (window_size, window_size))
    img_windows = sliding_window_view(img, (window_size, window_size))
    mu_x = np.einsum("ijkl,kl->ij", ref_windows, w)
    mu_y = np.einsum("ijkl,kl->ij", img_windows, w)
    xx = np.einsum("ijkl,ijkl,kl->ij", ref_windows, ref_windows, w)
    yy = np.einsum("ijkl,ijkl,kl->ij", img_windows, img_windows, w)
    xy = np.einsum("ijkl,ijkl,kl->ij", ref_windows, img_windows, w)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y

    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(numerator / denominator))


def quality_report(reference, test) -> QualityReport:
    """Bundle all three metrics for one image pair."""
    return QualityReport(
        mse=mse(reference, test),
        psnr_db=psnr(reference, test),
        mssim=mssim(reference, test),
    )
