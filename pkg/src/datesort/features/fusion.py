"""Fixed 46-slot feature layout and z-score scaling."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..preprocess import CALIBRATED, WAVELENGTHS, SpectralReading
from .color import ColorStats
from .geometry import GeometricFeatures
from .wavelet import SUBBANDS

LAYOUT_VERSION = "fv1"

GEOMETRIC_NAMES = ["area", "perimeter", "major_axis", "minor_axis", "eccentricity",
                   "solidity", "convex_area", "aspect_ratio"]
COLOR_NAMES = [f"{ch}_{stat}" for ch in "rgb" for stat in ("mean", "std", "skew", "kurt")]
TEXTURE_NAMES = ["entropy"] + [f"wav_{b}" for b in SUBBANDS]
SPECTRAL_NAMES = [f"spec_{int(nm)}" for nm in WAVELENGTHS]
FEATURE_NAMES = GEOMETRIC_NAMES + COLOR_NAMES + TEXTURE_NAMES + SPECTRAL_NAMES
N_FEATURES = len(FEATURE_NAMES)
SPECTRAL_SLICE = slice(N_FEATURES - 18, N_FEATURES)

assert N_FEATURES == 46


@dataclass(frozen=True)
class TextureFeatures:
    entropy: float
    wavelet_energies: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.entropy], self.wavelet_energies])


@dataclass
class FeatureScaler:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def identity(cls) -> "FeatureScaler":
        return cls(np.zeros(N_FEATURES), np.ones(N_FEATURES))

    @classmethod
    def fit(cls, X: np.ndarray) -> "FeatureScaler":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        return cls(mean, np.where(std > 0, std, 1.0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureScaler":
        return cls(np.array(d["mean"], dtype=float), np.array(d["std"], dtype=float))


def fuse(geom: GeometricFeatures | None, color: ColorStats | None,
         texture: TextureFeatures | None, spectral: SpectralReading | None,
         scaler: FeatureScaler | None = None) -> np.ndarray:
    """Concatenate the four modalities in the frozen layout, optionally scaled."""
    if geom is None or color is None or texture is None or spectral is None:
        raise ValueError("incomplete fusion input")
    if spectral.kind != CALIBRATED:
        raise ValueError("fusion expects a calibrated spectral reading")
    vec = np.concatenate([geom.as_vector(), color.as_vector(), texture.as_vector(), spectral.values])
    if scaler is not None:
        vec = scaler.transform(vec)
    return vec


def write_feature_table(path, ids, X, labels: dict[str, list]) -> None:
    """CSV: id, each label column, then the 46 named slots."""
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", *labels.keys(), *FEATURE_NAMES])
        for i, sid in enumerate(ids):
            w.writerow([sid, *(col[i] for col in labels.values()), *(repr(float(v)) for v in X[i])])
