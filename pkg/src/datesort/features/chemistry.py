"""Linear spectral estimators for moisture, TSS and sugar."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..preprocess import CALIBRATED, SpectralReading

TARGETS = ("moisture", "tss", "sugar")
BOUNDS = {"moisture": (0.0, 100.0), "tss": (0.0, np.inf), "sugar": (0.0, 100.0)}


@dataclass
class ChemistryModel:
    coef: np.ndarray     # (3, 18)
    bias: np.ndarray     # (3,)


def fit_chemistry(readings: list[SpectralReading], targets: np.ndarray) -> ChemistryModel:
    """Ordinary least squares per target; ``targets`` has shape (n, 3)."""
    X = np.array([r.values for r in readings])
    if any(r.kind != CALIBRATED for r in readings):
        raise ValueError("uncalibrated input")
    A = np.hstack([X, np.ones((len(X), 1))])
    sol, *_ = np.linalg.lstsq(A, np.asarray(targets, dtype=float), rcond=None)
    return ChemistryModel(sol[:-1].T.copy(), sol[-1].copy())


def estimate_chemistry(spectral: SpectralReading, model: ChemistryModel) -> dict[str, float]:
    if spectral.kind != CALIBRATED:
        raise ValueError("uncalibrated input")
    pred = model.coef @ spectral.values + model.bias
    return {name: float(np.clip(v, *BOUNDS[name])) for name, v in zip(TARGETS, pred)}
