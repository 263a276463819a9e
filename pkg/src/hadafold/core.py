"""Selection-history arithmetic for Hadamard rows and square basis patterns.

A Hadamard row of length ``2**k`` can be grown from a single seed entry by
``k`` folding steps: each step appends either a copy of the vector built so
far (a positive fold, +1) or a negated copy (a negative fold, -1).  The
sequence of fold choices is the row's *selection history*.  Bit ``b`` of
``serial - 1`` stores choice ``b + 1``, so rows, square patterns and
connected-run counts are all computable straight from the integer serial,
without materialising the ``2**k x 2**k`` matrix.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "DomainCount",
    "count_1d",
    "count_2d",
    "flood_fill_count",
    "fold_vector",
    "fwht_in_place",
    "history_to_pattern",
    "history_to_serial",
    "serial_to_history",
    "sign_changes",
]

_bit_positions_cache: dict[int, np.ndarray] = {}


def _bit_positions(k: int) -> np.ndarray:
    # tiny per-k cache: serial<->history conversions are called in bulk
    arr = _bit_positions_cache.get(k)
    if arr is None:
        arr = np.arange(k, dtype=np.int64)
        arr.setflags(write=False)
        _bit_positions_cache[k] = arr
    return arr


def _as_history(history) -> np.ndarray:
    h = np.asarray(history, dtype=np.int64)
    if h.ndim != 1 or h.size < 1:
        raise ValueError("selection history must be a non-empty 1-D sequence")
    if not np.all(np.abs(h) == 1):
        raise ValueError("selection history entries must be +1 or -1")
    return h


def _as_choices(choices) -> np.ndarray:
    # like _as_history but the empty sequence is allowed (zero folds)
    c = np.asarray(choices, dtype=np.int64)
    if c.ndim != 1:
        raise ValueError("fold choices must form a 1-D sequence")
    if c.size and not np.all(np.abs(c) == 1):
        raise ValueError("fold choices must be +1 or -1")
    return c


class DomainCount(NamedTuple):
    """Connected-domain tally of a square pattern.

    ``rows_1d`` counts the constant runs along the first pattern row,
    ``cols_1d`` the runs along the first column, and ``total_2d`` is their
    product, which equals the number of 4-connected constant regions of the
    full pattern.
    """

    rows_1d: int
    cols_1d: int
    total_2d: int


def serial_to_history(serial: int, k: int) -> np.ndarray:
    """Return the k fold choices that generate row ``serial`` of order ``2**k``.

    Bit ``b`` of ``serial - 1``, counted from the lowest bit, carries choice
    ``b + 1``: a set bit means a negative fold (-1), a clear bit a positive
    fold (+1).
    """
    if k < 1:
        raise ValueError("order exponent k must be at least 1")
    serial = int(serial)
    if not 1 <= serial <= (1 << k):
        raise ValueError(f"serial {serial} outside [1, {1 << k}] for k={k}")
    bits = (serial - 1 >> _bit_positions(k)) & 1
    return 1 - 2 * bits


def history_to_serial(history) -> int:
    """Inverse of :func:`serial_to_history`: fold choices back to the 1-based serial."""
    h = _as_history(history)
    weights = np.int64(1) << _bit_positions(h.size)
    return int(weights[h < 0].sum()) + 1


def fold_vector(seed: int, choices) -> np.ndarray:
    """Grow ``[seed]`` by successive folds; choice +1 appends a copy, -1 a negated copy.

    Returns an int8 vector of length ``2**len(choices)``.  With seed +1 and
    the choices from :func:`serial_to_history`, the result is the matching
    Hadamard row.
    """
    if seed not in (1, -1):
        raise ValueError("seed must be +1 or -1")
    c = _as_choices(choices)
    out = np.empty(1 << c.size, dtype=np.int8)
    out[0] = seed
    filled = 1
    for choice in c:
        out[filled : 2 * filled] = choice * out[:filled]
        filled *= 2
    return out


def history_to_pattern(history) -> np.ndarray:
    """Reshape the synthesised row into its square pattern.

    The first k/2 choices fold the seed into the first pattern row; the last
    k/2 choices fold that row downward.  This equals the row-major reshape of
    ``fold_vector(+1, history)`` to ``2**(k/2) x 2**(k/2)``.
    """
    h = _as_history(history)
    if h.size % 2:
        raise ValueError("square patterns need an even number of fold choices")
    side = 1 << (h.size // 2)
    return fold_vector(1, h).reshape(side, side)


def count_1d(seed: int, choices) -> int:
    """Number of maximal constant runs in ``fold_vector(seed, choices)``.

    Incremental O(k) rule: start at one run with running product P = +1; a
    choice equal to P merges the junction (runs double minus one), otherwise
    the junction breaks (runs double).  The seed's sign cancels at every
    junction, so the count does not depend on it.
    """
    if seed not in (1, -1):
        raise ValueError("seed must be +1 or -1")
    runs = 1
    parity = 1
    for choice in _as_choices(choices):
        if choice == parity:
            runs = 2 * runs - 1
        else:
            runs = 2 * runs
        parity *= choice
    return runs


def count_2d(history) -> DomainCount:
    """Connected-domain count of the square pattern of ``history``.

    The pattern's 4-connected regions factor across axes: each region is the
    cartesian product of one horizontal run of the first row with one
    vertical run of the first column, hence the total is the product of the
    two 1-D run counts.
    """
    h = _as_history(history)
    if h.size % 2:
        raise ValueError("square patterns need an even number of fold choices")
    half = h.size // 2
    rows = count_1d(1, h[:half])
    cols = count_1d(1, h[half:])
    return DomainCount(rows_1d=rows, cols_1d=cols, total_2d=rows * cols)


def flood_fill_count(pattern) -> int:
    """Count 4-connected constant regions of a +/-1 grid by explicit flood fill.

    Deliberately independent of :func:`count_2d` so the two can be checked
    against each other.
    """
    grid = np.asarray(pattern)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError("pattern must be a non-empty 2-D grid")
    if not np.all(np.abs(grid) == 1):
        raise ValueError("pattern entries must be +1 or -1")
    rows, cols = grid.shape
    cells = grid.tolist()
    seen = [[False] * cols for _ in range(rows)]
    regions = 0
    for si in range(rows):
        for sj in range(cols):
            if seen[si][sj]:
                continue
            regions += 1
            value = cells[si][sj]
            stack = [(si, sj)]
            seen[si][sj] = True
            while stack:
                i, j = stack.pop()
                if i > 0 and not seen[i - 1][j] and cells[i - 1][j] == value:
                    seen[i - 1][j] = True
                    stack.append((i - 1, j))
                if i + 1 < rows and not seen[i + 1][j] and cells[i + 1][j] == value:
                    seen[i + 1][j] = True
                    stack.append((i + 1, j))
                if j > 0 and not seen[i][j - 1] and cells[i][j - 1] == value:
                    seen[i][j - 1] = True
                    stack.append((i, j - 1))
                if j + 1 < cols and not seen[i][j + 1] and cells[i][j + 1] == value:
                    seen[i][j + 1] = True
                    stack.append((i, j + 1))
    return regions


def sign_changes(history) -> int:
    """Number of adjacent sign flips in the synthesised row, i.e. runs minus one."""
    return count_1d(1, _as_history(history)) - 1


def fwht_in_place(vec: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform, natural (Sylvester) order.

    Overwrites ``vec`` with ``H @ vec`` in O(N log N) adds and subtracts;
    exact on integer input.  Applying it twice yields N times the original
    vector.  ``vec`` must be 1-D, C-contiguous, with power-of-two length.
    """
    if not isinstance(vec, np.ndarray) or vec.ndim != 1:
        raise ValueError("fwht_in_place expects a 1-D numpy array")
    n = vec.size
    if n == 0 or n & (n - 1):
        raise ValueError("vector length must be a power of two")
    if not vec.flags.c_contiguous:
        raise ValueError("fwht_in_place needs a C-contiguous array")
    h = 1
    while h < n:
        blocks = vec.reshape(-1, 2, h)
        top = blocks[:, 0, :].copy()
        blocks[:, 0, :] += blocks[:, 1, :]
        blocks[:, 1, :] = top - blocks[:, 1, :]
        h *= 2
    return vec
