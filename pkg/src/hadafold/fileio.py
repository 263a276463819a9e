"""Plain-text and binary file formats: PGM scenes, PBM patterns, permutation
tables and RFC-4180 measurement CSVs.

All writers are byte-deterministic for fixed input so that repeated runs of
the same experiment produce identical artifacts.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from hadafold.orderings import SCHEMES, OrderingPermutation, permutation_is_valid

__all__ = [
    "MeasurementFile",
    "read_measurements",
    "read_pbm",
    "read_permutation",
    "read_pgm",
    "write_measurements",
    "write_pbm",
    "write_permutation",
    "write_pgm",
]


# ---------------------------------------------------------------------------
# PGM (P5, 8 bit)
# ---------------------------------------------------------------------------

def write_pgm(path, image) -> None:
    """Write a grayscale image as binary PGM; values are rounded and clipped to 0..255."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("PGM output expects a 2-D image")
    data = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    height, width = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _read_pnm_tokens(raw: bytes, count: int) -> tuple[list[int], int]:
    """Parse ``count`` whitespace-separated header integers, skipping # comments."""
    tokens: list[int] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(raw):
            raise ValueError("truncated PNM header")
        ch = raw[pos : pos + 1]
        if ch == b"#":
            end = raw.find(b"\n", pos)
            if end == -1:
                raise ValueError("unterminated comment in PNM header")
            pos = end + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(raw) and not raw[end : end + 1].isspace():
                end += 1
            token = raw[pos:end]
            if not token.isdigit():
                raise ValueError(f"bad PNM header token {token!r}")
            tokens.append(int(token))
            pos = end
    return tokens, pos + 1  # one whitespace byte terminates the header


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary PGM into a float array."""
    raw = Path(path).read_bytes()
    if raw[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    (width, height, maxval), offset = _read_pnm_tokens(raw[2:], 3)
    offset += 2
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported, maxval was {maxval}")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=offset)
    if pixels.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape(height, width).astype(np.float64)


# ---------------------------------------------------------------------------
# PBM (P1 ascii / P4 packed).  Convention: +1 cells are white, i.e. bit 0.
# ---------------------------------------------------------------------------

def write_pbm(path, pattern, ascii_format: bool = False) -> None:
    """Write a +/-1 pattern as a PBM bitmap (+1 -> white -> 0 bit)."""
    p = np.asarray(pattern)
    if p.ndim != 2 or not np.all(np.abs(p) == 1):
        raise ValueError("PBM output expects a 2-D +/-1 pattern")
    bits = (p < 0).astype(np.uint8)
    height, width = bits.shape
    with open(path, "wb") as fh:
        if ascii_format:
            fh.write(f"P1\n{width} {height}\n".encode("ascii"))
            for row in bits:
                fh.write(" ".join("1" if b else "0" for b in row).encode("ascii"))
                fh.write(b"\n")
        else:
            fh.write(f"P4\n{width} {height}\n".encode("ascii"))
            fh.write(np.packbits(bits, axis=1).tobytes())


def read_pbm(path) -> np.ndarray:
    """Read a P1 or P4 PBM back into a +/-1 pattern (white -> +1)."""
    raw = Path(path).read_bytes()
    magic = raw[:2]
    if magic not in (b"P1", b"P4"):
        raise ValueError(f"{path}: not a PBM file")
    (width, height), offset = _read_pnm_tokens(raw[2:], 2)
    offset += 2
    if magic == b"P4":
        row_bytes = (width + 7) // 8
        body = np.frombuffer(raw, dtype=np.uint8, count=row_bytes * height, offset=offset)
        if body.size != row_bytes * height:
            raise ValueError(f"{path}: truncated bitmap data")
        bits = np.unpackbits(body.reshape(height, row_bytes), axis=1)[:, :width]
    else:
        text = raw[offset - 1 :].decode("ascii", errors="strict")
        digits = [c for c in text if c in "01"]
        if len(digits) != width * height:
            raise ValueError(f"{path}: expected {width * height} bits, found {len(digits)}")
        bits = np.array(digits, dtype=np.uint8).reshape(height, width)
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


# ---------------------------------------------------------------------------
# Permutation tables
# ---------------------------------------------------------------------------

def write_permutation(path, perm: OrderingPermutation) -> None:
    """Write an ordering as ``# scheme k N`` plus one 1-based serial per line."""
    lines = [f"# {perm.scheme} {perm.k} {perm.n}"]
    lines.extend(str(int(s)) for s in perm.ranks)
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_permutation(path) -> OrderingPermutation:
    """Parse and validate a permutation file written by :func:`write_permutation`."""
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# scheme k N' header line")
    header = lines[0][1:].split()
    if len(header) != 3:
        raise ValueError(f"{path}: header must be '# scheme k N'")
    scheme, k_text, n_text = header
    if scheme not in SCHEMES:
        raise ValueError(f"{path}: unknown scheme {scheme!r}")
    k, n = int(k_text), int(n_text)
    if n != 1 << k:
        raise ValueError(f"{path}: header N={n} does not match 2**{k}")
    body = [line.strip() for line in lines[1:] if line.strip()]
    if len(body) != n:
        raise ValueError(f"{path}: expected {n} serials, found {len(body)}")
    try:
        ranks = np.array([int(v) for v in body], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer serial entry ({exc})") from None
    perm = OrderingPermutation(scheme, k, ranks)
    if not permutation_is_valid(perm):
        raise ValueError(f"{path}: serial list is not a bijection onto 1..{n}")
    return perm


# ---------------------------------------------------------------------------
# Measurement CSV
# ---------------------------------------------------------------------------

_MEASUREMENT_MAGIC = "hadafold-measurements"
_MEASUREMENT_HEADER = ["rank", "serial", "y_plus", "y_minus", "y_diff"]


@dataclass
class MeasurementFile:
    """Parsed measurement CSV: acquisition metadata plus the data columns."""

    scheme: str
    k: int
    mode: str
    model: str
    snri_db: Optional[float]
    od: float
    seed: int
    ranks: np.ndarray
    serials: np.ndarray
    y_plus: Optional[np.ndarray]
    y_minus: Optional[np.ndarray]
    values: np.ndarray


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_measurements(path, measurements) -> None:
    """Serialise a measurement set with a metadata comment line and RFC-4180 rows."""
    plan = measurements.plan
    noise = measurements.noise
    serials = plan.ordering.ranks[: plan.sample_count]
    meta = (
        f"# {_MEASUREMENT_MAGIC} scheme={plan.ordering.scheme} k={plan.ordering.k} mode={plan.mode} "
        f"model={noise.model} snri_db={_format_value(noise.snri_db)} "
        f"od={_format_value(noise.od)} seed={noise.seed}"
    )
    buffer = io.StringIO()
    buffer.write(meta + "\r\n")
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(_MEASUREMENT_HEADER)
    raw = measurements.raw_pairs
    for i, value in enumerate(measurements.values):
        plus = _format_value(float(raw[i, 0])) if raw is not None else ""
        minus = _format_value(float(raw[i, 1])) if raw is not None else ""
        writer.writerow([i + 1, int(serials[i]), plus, minus, _format_value(float(value))])
    Path(path).write_text(buffer.getvalue(), encoding="ascii")


def _parse_meta(line: str, path) -> dict:
    parts = line[1:].split()
    if not parts or parts[0] != _MEASUREMENT_MAGIC:
        raise ValueError(f"{path}: line 1: missing measurement metadata header")
    meta = {}
    for item in parts[1:]:
        key, _, value = item.partition("=")
        meta[key] = value
    return meta


def read_measurements(path) -> MeasurementFile:
    """Parse a measurement CSV, reporting the offending line on malformed input."""
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: line 1: expected metadata comment line")
    meta = _parse_meta(lines[0], path)
    try:
        scheme = meta["scheme"]
        k = int(meta["k"])
        mode = meta["mode"]
        model = meta["model"]
        snri_db = float(meta["snri_db"]) if meta.get("snri_db") else None
        od = float(meta["od"])
        seed = int(meta["seed"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: line 1: bad metadata field ({exc})") from None
    if len(lines) < 2 or [c.strip() for c in lines[1].split(",")] != _MEASUREMENT_HEADER:
        raise ValueError(f"{path}: line 2: expected header {','.join(_MEASUREMENT_HEADER)}")

    ranks, serials, plus, minus, values = [], [], [], [], []
    for number, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        fields = next(csv.reader([line]))
        if len(fields) != 5:
            raise ValueError(f"{path}: line {number}: expected 5 fields, found {len(fields)}")
        try:
            ranks.append(int(fields[0]))
            serials.append(int(fields[1]))
            plus.append(float(fields[2]) if fields[2] else math.nan)
            minus.append(float(fields[3]) if fields[3] else math.nan)
            values.append(float(fields[4]))
        except ValueError as exc:
            raise ValueError(f"{path}: line {number}: {exc}") from None
    if not values:
        raise ValueError(f"{path}: no measurement rows")
    has_raw = mode == "complementary_differential"
    return MeasurementFile(
        scheme=scheme,
        k=k,
        mode=mode,
        model=model,
        snri_db=snri_db,
        od=od,
        seed=seed,
        ranks=np.array(ranks, dtype=np.int64),
        serials=np.array(serials, dtype=np.int64),
        y_plus=np.array(plus) if has_raw else None,
        y_minus=np.array(minus) if has_raw else None,
        values=np.array(values, dtype=np.float64),
    )
