from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from ..preprocess import CalibrationReference, SpectralReading
from .generator import FruitSample, SimulatorConfig

GAIN_MIN, GAIN_MAX = 0.5, 1.5


@dataclass
class DriftConfig:
    enabled: bool = True
    gain_sigma: float = 0.02
    offset_sigma: float = 0.002     # reflectance units per step
    offset_cap: float = 0.05

    def to_dict(self) -> dict:
        return dict(enabled=self.enabled, gain_sigma=self.gain_sigma,
                    offset_sigma=self.offset_sigma, offset_cap=self.offset_cap)


@dataclass
class DriftState:
    lighting_gain: float = 1.0
    spectral_offset: np.ndarray = None
    time_step: int = 0

    def __post_init__(self):
        if self.spectral_offset is None:
            self.spectral_offset = np.zeros(18)


def reflect(x, lo, hi):
    """Fold ``x`` back into [lo, hi] by mirror reflection at the walls."""
    x = np.asarray(x, dtype=float)
    span = hi - lo
    y = np.mod(x - lo, 2 * span)
    y = np.where(y > span, 2 * span - y, y)
    return np.clip(lo + y, lo, hi)


def drift_step(state: DriftState, cfg: DriftConfig, rng: np.random.Generator) -> DriftState:
    """One reflected Gaussian random-walk step.

    Draw order per step: one normal for the gain, then 18 normals for the
    spectral offsets.
    """
    dg = rng.normal(0.0, cfg.gain_sigma)
    do = rng.normal(0.0, cfg.offset_sigma, 18)
    gain = float(reflect(state.lighting_gain + dg, GAIN_MIN, GAIN_MAX))
    off = reflect(state.spectral_offset + do, -cfg.offset_cap, cfg.offset_cap)
    return DriftState(gain, off, state.time_step + 1)


def apply_drift(sample: FruitSample, state: DriftState, reference: CalibrationReference) -> FruitSample:
    """Return ``sample`` as seen under ``state``; labels are untouched."""
    if state.lighting_gain == 1.0 and not np.any(state.spectral_offset):
        return sample
    img = np.clip(np.rint(sample.image.astype(float) * state.lighting_gain), 0, 255).astype(np.uint8)
    raw = sample.spectral.values + state.spectral_offset * (reference.white - reference.dark)
    return replace(sample, image=img, spectral=SpectralReading(raw, sample.spectral.kind))


def conveyor_stream(dataset: list[FruitSample], drift: DriftConfig, seed: int,
                    steps: int | None = None,
                    reference: CalibrationReference | None = None
                    ) -> Iterator[tuple[FruitSample, DriftState]]:
    """Yield drifted samples in seeded shuffled order.

    The dataset is reshuffled on every pass, so ``steps`` may exceed its
    length; ``steps=None`` makes a single pass. Drift uses its own stream so
    that the sample order does not depend on whether drift is enabled.
    """
    if not dataset:
        raise ValueError("conveyor needs a non-empty dataset")
    reference = reference or SimulatorConfig().reference
    order_rng = np.random.default_rng([seed, 0])
    drift_rng = np.random.default_rng([seed, 1])
    n = len(dataset) if steps is None else steps
    state = DriftState()
    order: list[int] = []
    for _ in range(n):
        if not order:
            order = list(order_rng.permutation(len(dataset)))
        idx = order.pop(0)
        if drift.enabled:
            state = drift_step(state, drift, drift_rng)
        else:
            state = DriftState(1.0, np.zeros(18), state.time_step + 1)
        yield apply_drift(dataset[idx], state, reference), state
