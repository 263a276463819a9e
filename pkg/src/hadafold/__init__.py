"""Hadamard-basis toolkit for single-pixel imaging experiments.

Selection-history arithmetic generates individual Hadamard basis patterns
without ever materialising the full matrix; six deterministic orderings rank
those patterns; a matrix-free simulator produces complementary differential
measurements with optional noise and attenuation; and TV-minimisation or
zero-filled linear reconstruction turns measurement prefixes back into
images scored by PSNR/MSSIM.
"""

from hadafold.assets import asset_path, block_glyph, load_asset, ramp_composite
from hadafold.core import (
    DomainCount,
    count_1d,
    count_2d,
    flood_fill_count,
    fold_vector,
    fwht_in_place,
    history_to_pattern,
    history_to_serial,
    serial_to_history,
    sign_changes,
)
from hadafold.fileio import (
    MeasurementFile,
    read_measurements,
    read_pbm,
    read_permutation,
    read_pgm,
    write_measurements,
    write_pbm,
    write_permutation,
    write_pgm,
)
from hadafold.harness import (
    ExperimentConfig,
    SweepRow,
    load_measurement_set,
    parse_config,
    run_simulate,
    run_sweep,
)
from hadafold.metrics import QualityReport, mse, mssim, psnr, quality_report
from hadafold.orderings import (
    SCHEMES,
    OrderingPermutation,
    cake_cutting_order,
    get_ordering,
    natural_order,
    origami_order,
    permutation_is_valid,
    russian_dolls_order,
    sequency_order,
    weight_key,
    weight_order,
)
from hadafold.reconstruct import (
    ReconstructionResult,
    SolverConfig,
    SolverDivergence,
    linear_reconstruct,
    tv_reconstruct,
    tv_value,
)
from hadafold.simulate import (
    NOISELESS,
    MeasurementPlan,
    MeasurementSet,
    NoiseSpec,
    as_scene_image,
    dither_expand,
    dsnr,
    forward_measure,
    gaussian_sigma_from_snri,
    measure,
    measure_complementary,
    poisson_noise,
)

__version__ = "0.1.0"

__all__ = [
    "DomainCount",
    "ExperimentConfig",
    "MeasurementFile",
    "MeasurementPlan",
    "MeasurementSet",
    "NOISELESS",
    "NoiseSpec",
    "OrderingPermutation",
    "QualityReport",
    "ReconstructionResult",
    "SCHEMES",
    "SolverConfig",
    "SolverDivergence",
    "SweepRow",
    "asset_path",
    "block_glyph",
    "cake_cutting_order",
    "count_1d",
    "count_2d",
    "dither_expand",
    "dsnr",
    "flood_fill_count",
    "fold_vector",
    "forward_measure",
    "fwht_in_place",
    "gaussian_sigma_from_snri",
    "get_ordering",
    "history_to_pattern",
    "history_to_serial",
    "linear_reconstruct",
    "load_asset",
    "load_measurement_set",
    "measure",
    "measure_complementary",
    "mse",
    "mssim",
    "natural_order",
    "origami_order",
    "parse_config",
    "permutation_is_valid",
    "poisson_noise",
    "psnr",
    "quality_report",
    "ramp_composite",
    "read_measurements",
    "read_pbm",
    "read_permutation",
    "read_pgm",
    "run_simulate",
    "run_sweep",
    "russian_dolls_order",
    "sequency_order",
    "serial_to_history",
    "sign_changes",
    "tv_reconstruct",
    "tv_value",
    "weight_key",
    "weight_order",
    "write_measurements",
    "write_pbm",
    "write_permutation",
    "write_pgm",
]
