"""Bundled test scenes.

Two deterministic 64x64 images ship with the package: a piecewise-constant
block glyph for sparse-gradient experiments and a grayscale ramp/shape
composite for smooth-content experiments.  Both are stored as PGM files and
regenerable from code, so tests can assert the files match the generators.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from hadafold.fileio import read_pgm

__all__ = ["asset_path", "block_glyph", "load_asset", "ramp_composite"]

_DATA_DIR = Path(__file__).with_name("data")


def block_glyph(side: int = 64) -> np.ndarray:
    """Dense multi-stroke block character, values 0 and 255.

    Stroke edges deliberately avoid power-of-two grid lines and the stroke
    count keeps the gradient rich; a glyph spanned by a handful of coarse
    Hadamard patterns would make every undersampled reconstruction trivially
    perfect and useless as a benchmark scene.
    """
    if side < 16 or side & (side - 1):
        raise ValueError("glyph side must be a power of two, at least 16")

    def span(lo: int, hi: int) -> slice:
        # stroke edges defined on the 64-pixel reference grid
        return slice(round(lo * side / 64), round(hi * side / 64))

    img = np.zeros((side, side), dtype=np.float64)
    img[span(4, 9), span(3, 61)] = 255.0     # top bar
    img[span(56, 61), span(3, 61)] = 255.0   # bottom bar
    img[span(4, 61), span(3, 8)] = 255.0     # left stem
    img[span(4, 61), span(56, 61)] = 255.0   # right stem
    img[span(14, 19), span(12, 52)] = 255.0  # inner bar, upper
    img[span(30, 34), span(12, 52)] = 255.0  # inner bar, middle
    img[span(45, 50), span(12, 52)] = 255.0  # inner bar, lower
    img[span(14, 50), span(30, 34)] = 255.0  # inner stem
    img[span(22, 27), span(19, 45)] = 255.0  # tick, upper
    img[span(38, 42), span(19, 45)] = 255.0  # tick, lower
    return img


def ramp_composite(side: int = 64) -> np.ndarray:
    """Horizontal ramp with a bright disc and a dark square; integer gray levels."""
    ramp = np.tile(np.linspace(0.0, 255.0, side), (side, 1))
    yy, xx = np.mgrid[0:side, 0:side]
    disc = (yy - 0.30 * side) ** 2 + (xx - 0.32 * side) ** 2 <= (0.18 * side) ** 2
    img = ramp.copy()
    img[disc] = 230.0
    lo_r, hi_r = int(0.55 * side), int(0.85 * side)
    lo_c, hi_c = int(0.50 * side), int(0.80 * side)
    img[lo_r:hi_r, lo_c:hi_c] = 40.0
    return np.rint(np.clip(img, 0.0, 255.0))


def asset_path(name: str) -> Path:
    """Filesystem path of a bundled PGM asset (``glyph64`` or ``ramp64``)."""
    path = _DATA_DIR / f"{name}.pgm"
    if not path.is_file():
        available = sorted(p.stem for p in _DATA_DIR.glob("*.pgm"))
        raise ValueError(f"unknown asset {name!r}; bundled assets: {available}")
    return path


def load_asset(name: str) -> np.ndarray:
    """Load a bundled asset as a float image."""
    return read_pgm(asset_path(name))
