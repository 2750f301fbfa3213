"""Geometric, colour, texture and spectral features, fused into a fixed layout."""

from .chemistry import ChemistryModel, estimate_chemistry, fit_chemistry
from .color import ColorStats, color_stats, entropy
from .extract import FeatureParams, ProcessedSample, process_sample
from .fusion import (
    FEATURE_NAMES,
    LAYOUT_VERSION,
    N_FEATURES,
    SPECTRAL_SLICE,
    FeatureScaler,
    TextureFeatures,
    fuse,
    write_feature_table,
)
from .geometry import GeometricFeatures, convex_hull, geometric_features, trace_perimeter
from .segment import ExtractionError, largest_component, luminance, segment
from .wavelet import DAUB4_HIGH, DAUB4_LOW, SUBBANDS, daub4_energies, dwt1, dwt2, subband_energies, wavedec2

__all__ = [
    "ExtractionError",
    "ChemistryModel", "ColorStats", "DAUB4_HIGH", "DAUB4_LOW", "FEATURE_NAMES", "FeatureParams",
    "FeatureScaler", "GeometricFeatures", "LAYOUT_VERSION", "N_FEATURES", "ProcessedSample",
    "SPECTRAL_SLICE", "SUBBANDS", "TextureFeatures", "color_stats", "convex_hull",
    "daub4_energies", "dwt1", "dwt2", "entropy", "estimate_chemistry", "fit_chemistry", "fuse",
    "geometric_features", "largest_component", "luminance", "process_sample", "segment",
    "subband_energies", "trace_perimeter", "wavedec2", "write_feature_table",
]
