"""Multitemporal SAR despeckling toolkit.

Simulates gamma-speckled image time series, despeckles them with an
adaptive patch-based temporal filter and three baselines, and grades the
results with full-reference metrics plus a no-reference residual
autocovariance score.
"""

__version__ = "0.1.0"

from .errors import (BadMagicError, CalibrationError, DegenerateRatioError,
                     DespeckError, DimensionMismatchError, HeaderFormatError,
                     InvalidParameterError, RasterFormatError,
                     TruncatedPayloadError)
from .filters import (FilterConfig, WeightVector, anltf_denoise,
                      arithmetic_mean, despeckle, nltf_denoise, patf_denoise,
                      patf_weights, uta_denoise, weights_from_dissimilarity)
from .metrics import MetricReport, enl, metric_report, mssim, psnr
from .raster import (export_class_ppm, export_pgm, load_scene, parse_scene,
                     read_stack, write_stack)
from .residual import (QualityMap, classify_quality, patch_autocov,
                       patch_score, quality_map, ratio)
from .similarity import (SimilarityParams, calibrate, calibrate_cached,
                         dissimilarity_plane, glrt, h0_sample,
                         patch_dissimilarity, s_glr, s_glr_equal_looks)
from .speckle import (ChangeProfile, ImageStack, Region, SceneSpec,
                      multilook, render_profile, render_scene, sample_speckle,
                      simulate_stack, speckle_field)

__all__ = [
    "BadMagicError", "CalibrationError", "ChangeProfile", "DegenerateRatioError",
    "DespeckError", "DimensionMismatchError", "FilterConfig", "HeaderFormatError",
    "ImageStack", "InvalidParameterError", "MetricReport", "QualityMap",
    "RasterFormatError", "Region", "SceneSpec", "SimilarityParams",
    "TruncatedPayloadError", "WeightVector", "anltf_denoise", "arithmetic_mean",
    "calibrate", "calibrate_cached", "classify_quality", "despeckle",
    "dissimilarity_plane", "enl", "export_class_ppm", "export_pgm", "glrt",
    "h0_sample", "load_scene", "metric_report", "mssim", "multilook",
    "nltf_denoise", "parse_scene", "patch_autocov", "patch_dissimilarity",
    "patch_score", "patf_denoise", "patf_weights", "psnr", "quality_map",
    "ratio", "read_stack", "render_profile", "render_scene", "s_glr",
    "s_glr_equal_looks", "sample_speckle", "simulate_stack", "speckle_field",
    "uta_denoise", "weights_from_dissimilarity", "write_stack",
]
