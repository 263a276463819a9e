"""Deterministic display orderings of the natural Hadamard basis.

Every scheme is a bijection from display rank to natural-order serial.  All
constructors work on integer serials via selection-history bit arithmetic, so
building an ordering costs O(N log N) time and O(N) memory even at order
2**16; no dense matrix is ever formed.

Schemes
-------
NA  natural order (identity)
SE  ascending count of sign changes along the row
CC  "cake-cutting": ascending count of 2-D connected domains, ties by serial
WH  "weight" sort: interleaved fold choices read as a binary key
RD  "Russian dolls": recursive quarters, each sorted by 2-D domain count
OR  "origami": recursive groups of four siblings per parent pattern
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hadafold.core import _as_history

__all__ = [
    "SCHEMES",
    "OrderingPermutation",
    "cake_cutting_order",
    "get_ordering",
    "natural_order",
    "origami_order",
    "permutation_is_valid",
    "russian_dolls_order",
    "sequency_order",
    "weight_key",
    "weight_order",
]

SCHEMES = ("NA", "SE", "RD", "OR", "CC", "WH")

# these schemes rank square patterns, so they need an even fold count
_SQUARE_SCHEMES = frozenset({"RD", "OR", "CC", "WH"})


@dataclass(frozen=True, eq=False)
class OrderingPermutation:
    """Rank -> serial table for one scheme at one order.

    ``ranks[r - 1]`` is the 1-based natural serial displayed at rank ``r``.
    The array is copied on construction and frozen read-only.
    """

    scheme: str
    k: int
    ranks: np.ndarray

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.k < 1:
            raise ValueError("order exponent k must be at least 1")
        ranks = np.array(self.ranks, dtype=np.int64)
        if ranks.shape != (1 << self.k,):
            raise ValueError(f"ranks must have shape ({1 << self.k},) for k={self.k}")
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)

    @property
    def n(self) -> int:
        return 1 << self.k

    def serial_at(self, rank: int) -> int:
        if not 1 <= rank <= self.n:
            raise ValueError(f"rank {rank} outside [1, {self.n}]")
        return int(self.ranks[rank - 1])


def _require_even(scheme: str, k: int) -> None:
    if k < 2 or k % 2:
        raise ValueError(f"scheme {scheme} ranks square patterns and needs even k >= 2, got {k}")


def _run_counts(bits: np.ndarray, num_choices: int) -> np.ndarray:
    """Vectorised run counts for bit-encoded fold choices (set bit = negative fold).

    In-place updates keep the auxiliary footprint at a few machine words per
    entry, which lets order-2**16 tables build inside an O(N) memory budget.
    """
    runs = np.ones_like(bits)
    parity = np.zeros_like(bits)
    scratch = np.empty_like(bits)
    for t in range(num_choices):
        np.right_shift(bits, t, out=scratch)
        scratch &= 1
        runs *= 2
        runs -= scratch == parity
        parity ^= scratch
    return runs


def _half_run_counts(half: int) -> np.ndarray:
    return _run_counts(np.arange(1 << half, dtype=np.int64), half)


def _domain_totals(k: int) -> np.ndarray:
    """2-D domain counts for every serial at order 2**k, indexed by serial - 1.

    The row half of a history lives in the low k/2 bits of serial - 1 and the
    column half in the high k/2 bits, so the full table is an outer product
    of the per-half run counts.
    """
    half = k // 2
    side = _half_run_counts(half)
    return np.multiply.outer(side, side).ravel()


def natural_order(k: int) -> OrderingPermutation:
    """Identity ordering: rank r shows serial r."""
    if k < 1:
        raise ValueError("order exponent k must be at least 1")
    return OrderingPermutation("NA", k, np.arange(1, (1 << k) + 1, dtype=np.int64))


def sequency_order(k: int) -> OrderingPermutation:
    """Ascending sign-change count.

    The counts over all serials are a bijection onto 0..N-1, so the rank of a
    serial is its sign-change count plus one and no tie-break is needed.
    """
    if k < 1:
        raise ValueError("order exponent k must be at least 1")
    n = 1 << k
    changes = _run_counts(np.arange(n, dtype=np.int64), k) - 1
    ranks = np.empty(n, dtype=np.int64)
    ranks[changes] = np.arange(1, n + 1, dtype=np.int64)
    return OrderingPermutation("SE", k, ranks)


def cake_cutting_order(k: int) -> OrderingPermutation:
    """Ascending 2-D connected-domain count, ties broken by ascending serial."""
    _require_even("CC", k)
    totals = _domain_totals(k)
    order = np.argsort(totals, kind="stable")
    return OrderingPermutation("CC", k, order + 1)


def weight_key(history) -> int:
    """Binary importance key of a history under the interleaved-position reading.

    Fold choices are reread in the order (1, k/2+1, 2, k/2+2, ..., k/2, k),
    i.e. alternating between the row and column halves.  Mapping +1 -> 0 and
    -1 -> 1, the value at reread position p weighs 2**(k - p); the key is the
    resulting binary number plus one.  Small keys mean coarse patterns.
    """
    h = _as_history(history)
    if h.size % 2:
        raise ValueError("weight keys are defined for even fold counts")
    k = h.size
    positions = _weight_positions(k)
    bits = h[positions] < 0
    weights = np.int64(1) << np.arange(k - 1, -1, -1)
    return int(weights[bits].sum()) + 1


def _weight_positions(k: int) -> np.ndarray:
    # 0-based reread order: row choice 1, column choice 1, row choice 2, ...
    half = k // 2
    pos = np.empty(k, dtype=np.int64)
    pos[0::2] = np.arange(half)
    pos[1::2] = np.arange(half, k)
    return pos


def weight_order(k: int) -> OrderingPermutation:
    """Rank serials by ascending weight key; a pure bit permutation of serial - 1."""
    _require_even("WH", k)
    n = 1 << k
    serials_minus_1 = np.arange(n, dtype=np.int64)
    key = np.zeros(n, dtype=np.int64)
    for p, q in enumerate(_weight_positions(k)):
        key |= ((serials_minus_1 >> int(q)) & 1) << (k - 1 - p)
    ranks = np.empty(n, dtype=np.int64)
    ranks[key] = serials_minus_1 + 1
    return OrderingPermutation("WH", k, ranks)


def _sorted_by_count(rows: np.ndarray, cols: np.ndarray, half: int):
    """Sort (row-bits, col-bits) pairs by 2-D count, ties by natural serial."""
    totals = _run_counts(rows, half) * _run_counts(cols, half)
    serials = (cols << half) | rows
    order = np.lexsort((serials, totals))
    return rows[order], cols[order]


def russian_dolls_order(k: int) -> OrderingPermutation:
    """Recursive quarter construction.

    The order-k list is built from the order-(k-2) list by prefixing one new
    fold choice to each half of every history, which splits the basis into
    quarters led by (+1,+1), (+1,-1), (-1,+1) and (-1,-1).  Every quarter is
    then sorted by ascending 2-D domain count with ties by serial.  The
    (+1,+1) quarter is exactly the order-(k-2) basis stretched by two in each
    direction (prefixing +1 stretches a pattern without changing its domain
    count), so the first N/4 ranks always reproduce the next-lower basis.
    """
    _require_even("RD", k)
    rows = np.zeros(1, dtype=np.int64)
    cols = np.zeros(1, dtype=np.int64)
    for half in range(1, k // 2 + 1):
        parts = []
        for row_bit, col_bit in ((0, 0), (0, 1), (1, 0), (1, 1)):
            # prefixing shifts the existing choices one position outward
            quarter_rows = (rows << 1) | row_bit
            quarter_cols = (cols << 1) | col_bit
            quarter_rows, quarter_cols = _sorted_by_count(quarter_rows, quarter_cols, half)
            parts.append((quarter_rows, quarter_cols))
        rows = np.concatenate([p[0] for p in parts])
        cols = np.concatenate([p[1] for p in parts])
    serials = ((cols << (k // 2)) | rows) + 1
    return OrderingPermutation("RD", k, serials)


def origami_order(k: int) -> OrderingPermutation:
    """Recursive groups-of-four construction.

    Starting from the order-2 list [+1;+1], [+1;-1], [-1;+1], [-1;-1], each
    parent history spawns four children by appending one new outermost fold
    choice to each half.  The four siblings are sorted by ascending 2-D
    domain count (ties by serial) and the groups follow the parent order.
    """
    _require_even("OR", k)
    rows = np.array([0, 0, 1, 1], dtype=np.int64)
    cols = np.array([0, 1, 0, 1], dtype=np.int64)
    for half in range(2, k // 2 + 1):
        count = rows.size
        child_rows = np.empty((count, 4), dtype=np.int64)
        child_cols = np.empty((count, 4), dtype=np.int64)
        for j, (row_bit, col_bit) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            child_rows[:, j] = rows | (row_bit << (half - 1))
            child_cols[:, j] = cols | (col_bit << (half - 1))
        # unique composite sort key: domain count first, natural serial second
        keys = (
            _run_counts(child_rows.ravel(), half) * _run_counts(child_cols.ravel(), half)
        ).reshape(count, 4)
        keys *= np.int64((1 << k) + 1)
        keys += (child_cols << half) | child_rows
        order = np.argsort(keys, axis=1)
        del keys
        rows = np.take_along_axis(child_rows, order, axis=1).ravel()
        cols = np.take_along_axis(child_cols, order, axis=1).ravel()
    serials = ((cols << (k // 2)) | rows) + 1
    return OrderingPermutation("OR", k, serials)


def permutation_is_valid(perm: OrderingPermutation) -> bool:
    """True iff the rank table is a bijection onto 1..N."""
    ranks = perm.ranks
    if ranks.shape != (perm.n,):
        return False
    if ranks.min() < 1 or ranks.max() > perm.n:
        return False
    return int(np.bincount(ranks - 1, minlength=perm.n).max()) == 1


_BUILDERS = {
    "NA": natural_order,
    "SE": sequency_order,
    "RD": russian_dolls_order,
    "OR": origami_order,
    "CC": cake_cutting_order,
    "WH": weight_order,
}


@lru_cache(maxsize=None)
def get_ordering(scheme: str, k: int) -> OrderingPermutation:
    """Build (or fetch from the process-wide cache) one ordering.

    The cache is keyed by (scheme, k); returned permutations are immutable,
    so sharing across threads is safe.
    """
    try:
        builder = _BUILDERS[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}") from None
    return builder(k)
