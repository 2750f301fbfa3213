"""Glue between simulator samples and the model: preprocessing, splits, prediction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import ExtractionError, FeatureParams, luminance, process_sample
from .neuralmodel import Labels, NetworkModel, Prediction, TrainData, decide, forward
from .preprocess import CalibrationReference, preprocess_image


def labels_of(samples) -> Labels:
    return Labels(
        np.array([int(s.variety) for s in samples]),
        np.array([float(s.attrs.spoiled) for s in samples]),
        np.array([float(s.attrs.days_to_expiry) for s in samples]),
    )


def prepare(samples, reference: CalibrationReference, params: FeatureParams | None = None) -> TrainData:
    """Preprocess every sample into model-ready arrays."""
    processed = [process_sample(s, reference, params) for s in samples]
    return TrainData(
        np.stack([p.image for p in processed]),
        np.stack([p.features for p in processed]),
        labels_of(samples),
        np.array([s.id for s in samples]),
    )


def stratified_split(varieties, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffled split; each class contributes round(n * fraction) test items."""
    varieties = np.asarray(varieties)
    rng = np.random.default_rng([seed, 3])
    train_idx, test_idx = [], []
    for c in np.unique(varieties):
        members = rng.permutation(np.nonzero(varieties == c)[0])
        n_test = int(round(len(members) * test_fraction))
        test_idx.extend(members[:n_test])
        train_idx.extend(members[n_test:])
    return np.sort(np.array(train_idx, dtype=int)), np.sort(np.array(test_idx, dtype=int))


@dataclass
class LiveSettings:
    """Runtime knobs adjusted by the adaptation controller."""
    gain: float = 1.0
    threshold: float = 0.5
    reference: CalibrationReference | None = None


def predict_sample(model: NetworkModel, sample, settings: LiveSettings,
                   params: FeatureParams | None = None) -> tuple[Prediction | None, float]:
    """Predict one conveyor sample; also returns its mean foreground brightness.

    When no fruit can be measured the prediction is ``None`` (the item goes
    to manual reject) and the brightness is the whole-frame mean.
    """
    try:
        p = process_sample(sample, settings.reference, params, gain=settings.gain)
    except ExtractionError:
        params = params or FeatureParams()
        img = preprocess_image(sample.image, params.size, params.sigma, settings.gain)
        return None, float(luminance(img).mean())
    out = forward(model, p.image[None], p.features[None])
    pred = decide(out.variety_prob[0], out.spoil_prob[0], out.shelf_days[0], settings.threshold)
    return pred, p.brightness
