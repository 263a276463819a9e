"""Experiment orchestration: config files, measurement export, sweep campaigns.

A sweep walks the Cartesian grid scheme x ratio x SNR from a flat key=value
config file, reconstructs every point, and writes one CSV row per point.
Grid points are independent: each owns a seed derived from (master seed,
point index), so results do not depend on the number of worker threads and
two runs of the same config are byte-identical.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from hadafold.fileio import read_measurements, read_pgm, write_measurements, write_pgm
from hadafold.metrics import mssim, psnr
from hadafold.orderings import SCHEMES, get_ordering
from hadafold.reconstruct import SolverConfig, linear_reconstruct, tv_reconstruct
from hadafold.simulate import (
    NOISE_MODELS,
    MeasurementPlan,
    MeasurementSet,
    NoiseSpec,
    as_scene_image,
    measure,
)

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "SweepRow",
    "format_row",
    "load_measurement_set",
    "parse_config",
    "run_simulate",
    "run_sweep",
]

METHODS = ("tv", "linear")

CSV_HEADER = (
    "scheme",
    "k",
    "sampling_ratio",
    "noise_model",
    "snri_db",
    "od",
    "psnr_db",
    "mssim",
    "recon_seconds",
    "outer_iters",
    "error",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep campaign: scene, grid axes, noise, method and outputs."""

    image_path: str
    schemes: tuple = ("WH",)
    ratios: tuple = (0.125,)
    noise_model: str = "none"
    snri_db: tuple = ()
    od: float = 0.0
    seed: int = 0
    method: str = "tv"
    output_dir: str = "out"
    save_images: bool = False
    timings: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not self.image_path:
            raise ValueError("image_path must be a non-empty path")
        if not self.output_dir:
            raise ValueError("output_dir must be a non-empty path")
        if not self.schemes:
            raise ValueError("schemes list must not be empty")
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("schemes list contains duplicates")
        if not self.ratios:
            raise ValueError("ratios list must not be empty")
        for ratio in self.ratios:
            if not 0.0 < ratio <= 1.0:
                raise ValueError(f"sampling ratios must lie in (0, 1], got {ratio}")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(
                f"unknown noise model {self.noise_model!r}; expected one of {NOISE_MODELS}"
            )
        if self.noise_model != "none" and not self.snri_db:
            raise ValueError("snri_db list must not be empty when a noise model is active")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class SweepRow:
    """One grid point of a sweep; ``error`` is empty on success."""

    scheme: str
    k: int
    sampling_ratio: float
    noise_model: str
    snri_db: Optional[float]
    od: float
    psnr_db: Optional[float] = None
    mssim: Optional[float] = None
    recon_seconds: Optional[float] = None
    outer_iters: Optional[int] = None
    error: str = ""


# ---------------------------------------------------------------------------
# config file parsing

_LIST_KEYS = {"schemes", "ratios", "snri_db"}
_SOLVER_KEYS = {"mu", "beta", "outer_max", "inner_max", "tol", "nonneg"}
_SCALAR_KEYS = {
    "image_path",
    "noise_model",
    "od",
    "seed",
    "method",
    "output_dir",
    "save_images",
    "timings",
}


def _parse_bool(value: str, where: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    raise ValueError(f"{where}: expected true or false, got {value!r}")


def parse_config(path) -> ExperimentConfig:
    """Read a flat ``key = value`` config file into an :class:`ExperimentConfig`.

    Blank lines and lines starting with ``#`` are ignored.  List-valued keys
    take comma-separated entries.  Unknown or duplicated keys are errors.
    """
    text = Path(path).read_text(encoding="utf-8")
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ValueError(f"{path}: line {lineno}: expected key = value, got {stripped!r}")
        key = key.strip()
        value = value.strip()
        if key not in _LIST_KEYS | _SOLVER_KEYS | _SCALAR_KEYS:
            raise ValueError(f"{path}: line {lineno}: unknown config key {key!r}")
        if key in raw:
            raise ValueError(f"{path}: line {lineno}: duplicate config key {key!r}")
        raw[key] = (lineno, value)

    if "image_path" not in raw:
        raise ValueError(f"{path}: missing required key 'image_path'")

    kwargs: dict = {}
    solver_overrides: dict = {}
    for key, (lineno, value) in raw.items():
        where = f"{path}: line {lineno}"
        try:
            if key == "schemes":
                kwargs[key] = tuple(item.strip() for item in value.split(","))
            elif key in ("ratios", "snri_db"):
                kwargs[key] = tuple(float(item) for item in value.split(","))
            elif key in ("od",):
                kwargs[key] = float(value)
            elif key == "seed":
                kwargs[key] = int(value)
            elif key in ("save_images", "timings"):
                kwargs[key] = _parse_bool(value, where)
            elif key in ("image_path", "noise_model", "method", "output_dir"):
                kwargs[key] = value
            elif key == "nonneg":
                solver_overrides[key] = _parse_bool(value, where)
            elif key in ("outer_max", "inner_max"):
                solver_overrides[key] = int(value)
            else:  # mu, beta, tol
                solver_overrides[key] = float(value)
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from None
    if solver_overrides:
        kwargs["solver"] = replace(SolverConfig(), **solver_overrides)
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# grid execution

def _grid(config: ExperimentConfig) -> list:
    """Deterministic point order: scheme-major, then ratio, then SNR."""
    snris: Sequence[Optional[float]]
    snris = config.snri_db if config.noise_model != "none" else (None,)
    return [
        (scheme, ratio, snri)
        for scheme in config.schemes
        for ratio in config.ratios
        for snri in snris
    ]


def _point_seed(master: int, index: int) -> int:
    """Independent per-point stream; stable under any worker count."""
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def _token(value) -> str:
    return str(value).replace(".", "p").replace("-", "m")


def _point_name(config: ExperimentConfig, scheme: str, ratio: float, snri) -> str:
    parts = [scheme, f"r{_token(ratio)}"]
    if config.noise_model == "none":
        parts.append("none")
    else:
        parts.append(f"{config.noise_model}{_token(snri)}db")
    if config.od:
        parts.append(f"od{_token(config.od)}")
    return "_".join(parts)


def _noise_for_point(config: ExperimentConfig, snri, seed: int) -> NoiseSpec:
    if config.noise_model == "none":
        return NoiseSpec(model="none", seed=seed, od=config.od)
    return NoiseSpec(model=config.noise_model, snri_db=snri, seed=seed, od=config.od)


def _plan_for_point(image: np.ndarray, scheme: str, ratio: float) -> MeasurementPlan:
    n = image.size
    k = n.bit_length() - 1
    count = max(1, round(ratio * n))
    return MeasurementPlan(ordering=get_ordering(scheme, k), sample_count=count)


def _run_point(image, config: ExperimentConfig, index: int, scheme: str, ratio: float, snri):
    """Reconstruct one grid point; failures land in the row, never raise."""
    row = SweepRow(
        scheme=scheme,
        k=0,
        sampling_ratio=ratio,
        noise_model=config.noise_model,
        snri_db=snri,
        od=config.od,
    )
    try:
        if isinstance(image, Exception):
            raise image
        plan = _plan_for_point(image, scheme, ratio)
        row.k = plan.ordering.k
        row.sampling_ratio = plan.sampling_ratio
        noise = _noise_for_point(config, snri, _point_seed(config.seed, index))
        measured = measure(image, plan, noise)
        if config.method == "tv":
            result = tv_reconstruct(measured, config.solver)
        else:
            result = linear_reconstruct(measured)
        row.psnr_db = psnr(image, result.image)
        row.mssim = mssim(image, result.image)
        row.outer_iters = result.outer_iters
        if config.timings:
            row.recon_seconds = result.wall_seconds
        return row, result.image
    except Exception as exc:  # noqa: BLE001 - per-point isolation is the contract
        row.error = f"{type(exc).__name__}: {exc}"
        return row, None


def _format_cell(value) -> str:
    return "" if value is None else str(value)


def format_row(row: SweepRow) -> list:
    """CSV cells in header order; ``None`` renders as an empty cell."""
    return [
        row.scheme,
        str(row.k),
        _format_cell(row.sampling_ratio),
        row.noise_model,
        _format_cell(row.snri_db),
        _format_cell(row.od),
        _format_cell(row.psnr_db),
        _format_cell(row.mssim),
        _format_cell(row.recon_seconds),
        _format_cell(row.outer_iters),
        row.error,
    ]


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(format_row(row))
    Path(path).write_text(buffer.getvalue(), encoding="ascii")


def run_sweep(config: ExperimentConfig, jobs: int = 1) -> list:
    """Execute the full grid and write ``sweep.csv`` (plus optional images).

    Returns the list of :class:`SweepRow` in grid order.  With ``jobs > 1``
    the points run on a thread pool; row order and content are unaffected.
    """
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    try:
        image = as_scene_image(read_pgm(config.image_path))
    except Exception as exc:  # noqa: BLE001 - the load failure is replayed into every row
        image = exc
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = _grid(config)

    def work(indexed):
        index, (scheme, ratio, snri) = indexed
        return _run_point(image, config, index, scheme, ratio, snri)

    if jobs == 1:
        outcomes = [work(item) for item in enumerate(points)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(work, enumerate(points)))

    rows = [row for row, _ in outcomes]
    write_sweep_csv(out_dir / "sweep.csv", rows)
    if config.save_images:
        for (scheme, ratio, snri), (row, recon) in zip(points, outcomes):
            if recon is not None:
                name = f"recon_{_point_name(config, scheme, ratio, snri)}.pgm"
                write_pgm(out_dir / name, recon)
    return rows


def load_measurement_set(path) -> MeasurementSet:
    """Rebuild an in-memory measurement set from a measurement CSV.

    The file must hold the first M ranks of its ordering; the stored serials
    are checked against a freshly built permutation so a corrupted file or a
    mislabelled header cannot silently feed the reconstructor.
    """
    parsed = read_measurements(path)
    count = len(parsed.values)
    expected_ranks = np.arange(1, count + 1)
    if not np.array_equal(parsed.ranks, expected_ranks):
        raise ValueError(f"{path}: ranks must be the contiguous prefix 1..{count}")
    ordering = get_ordering(parsed.scheme, parsed.k)
    if not np.array_equal(parsed.serials, ordering.ranks[:count]):
        raise ValueError(
            f"{path}: serial column does not match the {parsed.scheme} ordering at k={parsed.k}"
        )
    plan = MeasurementPlan(ordering=ordering, sample_count=count, mode=parsed.mode)
    noise = NoiseSpec(model=parsed.model, snri_db=parsed.snri_db, seed=parsed.seed, od=parsed.od)
    raw = None
    if parsed.y_plus is not None and parsed.y_minus is not None:
        raw = np.column_stack([parsed.y_plus, parsed.y_minus])
    return MeasurementSet(values=parsed.values, raw_pairs=raw, plan=plan, noise=noise)


def run_simulate(config: ExperimentConfig) -> list:
    """Measure every grid point and write one measurement CSV per point."""
    image = as_scene_image(read_pgm(config.image_path))
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for index, (scheme, ratio, snri) in enumerate(_grid(config)):
        plan = _plan_for_point(image, scheme, ratio)
        noise = _noise_for_point(config, snri, _point_seed(config.seed, index))
        measured = measure(image, plan, noise)
        path = out_dir / f"meas_{_point_name(config, scheme, ratio, snri)}.csv"
        write_measurements(path, measured)
        paths.append(path)
    return paths
