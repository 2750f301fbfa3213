from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..features.fusion import FeatureScaler
from .network import (
    SHELF_SCALE,
    DivergenceError,
    Labels,
    ModelConfig,
    NetworkModel,
    forward,
    init,
    loss_and_grads,
)

log = logging.getLogger(__name__)

HEADS = ("total", "variety", "spoilage", "shelf_life")


@dataclass
class TrainData:
    images: np.ndarray      # (N, s, s, 3) preprocessed
    features: np.ndarray    # (N, 46) unscaled
    labels: Labels
    ids: np.ndarray | None = None

    def __len__(self):
        return len(self.images)

    def subset(self, idx) -> "TrainData":
        idx = np.asarray(idx)
        return TrainData(self.images[idx], self.features[idx], self.labels.subset(idx),
                         None if self.ids is None else self.ids[idx])


@dataclass
class TrainReport:
    epoch_losses: dict[str, list[float]] = field(default_factory=lambda: {h: [] for h in HEADS})
    fold_metrics: list[dict] = field(default_factory=list)
    wall_clock: float = 0.0
    model: NetworkModel | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {"epoch_losses": self.epoch_losses, "fold_metrics": self.fold_metrics}
        if include_timing:
            d["wall_clock"] = self.wall_clock
        return d

    def __eq__(self, other):
        if not isinstance(other, TrainReport):
            return NotImplemented
        return self.epoch_losses == other.epoch_losses and self.fold_metrics == other.fold_metrics


def augment(images: np.ndarray, config: ModelConfig, rng: np.random.Generator) -> np.ndarray:
    """On-the-fly flips, brightness jitter (+-10%) and quarter turns.

    Draws happen for every flag in a fixed order whether or not it is
    enabled, so toggling one flag does not reshuffle the others.
    """
    n = len(images)
    flip = rng.uniform(size=n) < 0.5
    bright = rng.uniform(0.9, 1.1, size=n)
    turns = rng.integers(0, 4, size=n)
    out = images.copy()
    if config.augment_flip:
        out[flip] = out[flip, :, ::-1, :]
    if config.augment_brightness:
        out = np.clip(out * bright[:, None, None, None], 0.0, 1.0)
    if config.augment_rotate:
        for k in (1, 2, 3):
            sel = turns == k
            if sel.any():
                out[sel] = np.rot90(out[sel], k=k, axes=(1, 2))
    return out


def train(model: NetworkModel, data: TrainData, config: ModelConfig | None = None,
          fit_scaler: bool = True) -> TrainReport:
    """Minibatch SGD with momentum; updates ``model`` in place.

    The feature scaler is refit on ``data`` unless ``fit_scaler`` is off.
    """
    config = config or model.config
    if len(data) < config.batch_size:
        raise ValueError(f"dataset size {len(data)} is smaller than batch_size {config.batch_size}")
    t0 = time.perf_counter()
    if fit_scaler:
        model.scaler = FeatureScaler.fit(data.features)
    rng = np.random.default_rng([config.seed, 1])
    velocity = {k: np.zeros_like(v) for k, v in model.params.items()}
    report = TrainReport(model=model)
    n = len(data)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        sums = dict.fromkeys(HEADS, 0.0)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            imgs = augment(data.images[idx], config, rng)
            loss, grads = loss_and_grads(model, imgs, data.features[idx], data.labels.subset(idx))
            for k, g in grads.items():
                if not np.all(np.isfinite(g)):
                    raise DivergenceError(f"numerical divergence: non-finite gradient in {k} at epoch {epoch}")
                velocity[k] = config.momentum * velocity[k] - config.learning_rate * g
                model.params[k] += velocity[k]
            for h in HEADS:
                sums[h] += loss[h] * len(idx)
        for h in HEADS:
            report.epoch_losses[h].append(sums[h] / n)
        log.debug("epoch %d loss %.4f", epoch, sums["total"] / n)
    report.wall_clock = time.perf_counter() - t0
    return report


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Fold index per sample.

    Each class is shuffled, classes are concatenated in code order and
    folds are dealt round-robin along that list, so fold sizes differ by at
    most one and every class is spread evenly.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(labels) < k:
        raise ValueError(f"dataset size {len(labels)} smaller than k={k}")
    rng = np.random.default_rng([seed, 2])
    order = []
    for c in np.unique(labels):
        members = np.nonzero(labels == c)[0]
        if len(members) < k:
            raise ValueError(f"stratification impossible: class {c} has {len(members)} < {k} samples")
        order.extend(rng.permutation(members))
    folds = np.empty(len(labels), dtype=int)
    folds[np.asarray(order)] = np.arange(len(order)) % k
    return folds


@dataclass
class CVResult:
    fold_accuracy: list[float]
    mean_accuracy: float
    folds: np.ndarray


def kfold_cv(data: TrainData, config: ModelConfig, k: int = 5) -> CVResult:
    """Stratified k-fold CV of variety accuracy; each fold trains from a fresh init."""
    folds = stratified_folds(data.labels.variety, k, config.seed)
    accs = []
    for f in range(k):
        tr = np.nonzero(folds != f)[0]
        va = np.nonzero(folds == f)[0]
        model = init(config)
        train(model, data.subset(tr), config)
        out = forward(model, data.images[va], data.features[va])
        accs.append(float(np.mean(out.variety_prob.argmax(axis=1) == data.labels.variety[va])))
    return CVResult(accs, float(np.mean(accs)), folds)


@dataclass(frozen=True)
class Prediction:
    variety: int
    spoil_prob: float
    spoiled: bool
    shelf_days: int


def decide(variety_prob, spoil_prob, shelf_days, threshold: float = 0.5) -> Prediction:
    """Turn raw head outputs for one sample into a sorting decision."""
    days = int(np.rint(np.clip(shelf_days, 0.0, SHELF_SCALE)))
    return Prediction(int(np.argmax(variety_prob)), float(spoil_prob), bool(spoil_prob >= threshold), days)


def predict(model: NetworkModel, image: np.ndarray, features: np.ndarray,
            threshold: float = 0.5) -> Prediction:
    out = forward(model, image[None], np.asarray(features)[None])
    return decide(out.variety_prob[0], out.spoil_prob[0], out.shelf_days[0], threshold)
