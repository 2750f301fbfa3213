from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..preprocess import CalibrationReference, calibrate_spectral, preprocess_image
from .color import color_stats, entropy
from .fusion import TextureFeatures, fuse
from .geometry import geometric_features
from .segment import luminance, segment
from .wavelet import daub4_energies


@dataclass
class FeatureParams:
    size: int = 64
    sigma: float = 0.8
    threshold: float = 0.1


@dataclass
class ProcessedSample:
    image: np.ndarray        # preprocessed (size, size, 3) floats in [0, 1]
    features: np.ndarray     # unscaled 46-slot vector
    brightness: float        # mean foreground luminance


def process_sample(sample, reference: CalibrationReference, params: FeatureParams | None = None,
                   gain: float = 1.0) -> ProcessedSample:
    """Preprocess one sample and compute its fused feature vector."""
    params = params or FeatureParams()
    img = preprocess_image(sample.image, params.size, params.sigma, gain)
    mask = segment(img, params.threshold)
    texture = TextureFeatures(entropy(img, mask), daub4_energies(img, mask))
    spectral = calibrate_spectral(sample.spectral, reference)
    vec = fuse(geometric_features(mask), color_stats(img, mask), texture, spectral)
    return ProcessedSample(img, vec, float(luminance(img)[mask].mean()))
