"""FLAIR hyperintensity segmentation pipeline.

Arrays are (X, Y, Z) with x varying fastest; pass Fortran-ordered arrays to
avoid a copy.
"""

from ._flairkit import (
    FlairkitError,
    GeometryMismatch,
    NiftiError,
    binarize,
    clip_intensities,
    connected_components,
    default_config,
    dice,
    evaluate_case,
    evaluate_manifest,
    filter_small_components,
    hd95,
    infer,
    load_volume,
    make_phantom,
    median_iqr,
    normalize_nonzero,
    oracle,
    percentile,
    plan_tiles,
    preprocess,
    resample,
    save_mask,
    save_volume,
    stratified_split,
)

__version__ = "0.1.0"
