"""Independent second implementations used as test oracles.

Everything here is deliberately naive: dense matrices, double loops and
brute-force searches that the library's fast paths must agree with.
"""

import numpy as np

_H2 = np.array([[1, 1], [1, -1]], dtype=np.int64)


def dense_hadamard(k: int) -> np.ndarray:
    """Sylvester construction; row b applies choice t as bit t-1 of b."""
    matrix = np.array([[1]], dtype=np.int64)
    for _ in range(k):
        matrix = np.kron(_H2, matrix)
    return matrix


def mse_double_loop(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    total = 0.0
    rows, cols = a.shape
    for r in range(rows):
        for c in range(cols):
            total += (a[r, c] - b[r, c]) ** 2
    return total / (rows * cols)


def tv_double_loop(img) -> float:
    """Isotropic TV with periodic forward differences, scalar loops."""
    img = np.asarray(img, dtype=np.float64)
    rows, cols = img.shape
    total = 0.0
    for r in range(rows):
        for c in range(cols):
            dx = img[r, (c + 1) % cols] - img[r, c]
            dy = img[(r + 1) % rows, c] - img[r, c]
            total += (dx * dx + dy * dy) ** 0.5
    return total


def _shrink_objective(wx, wy, zx, zy, radius):
    return radius * np.hypot(wx, wy) + 0.5 * ((wx - zx) ** 2 + (wy - zy) ** 2)


def shrink_grid_search(zx: float, zy: float, radius: float, span: float = 2.0, steps: int = 401):
    """Brute-force the 2D shrinkage objective radius*|w| + 0.5*|w - z|^2.

    Two grid passes: a coarse sweep of [-span, span]^2 followed by an equally
    sized sweep of a +/- two-cell window around the coarse winner, which
    brings the location error below half a fine cell (~5e-5 by default).
    """
    center = (0.0, 0.0)
    half_width = span
    best = center
    for _ in range(2):
        gx = np.linspace(center[0] - half_width, center[0] + half_width, steps)
        gy = np.linspace(center[1] - half_width, center[1] + half_width, steps)
        wx, wy = np.meshgrid(gx, gy, indexing="ij")
        values = _shrink_objective(wx, wy, zx, zy, radius)
        flat = int(np.argmin(values))
        best = (float(wx.ravel()[flat]), float(wy.ravel()[flat]))
        center = best
        half_width = 2.0 * (gx[1] - gx[0])
    return best
