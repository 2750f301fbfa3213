from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .segment import luminance

_DEGENERATE_VAR = 1e-24


@dataclass(frozen=True)
class ColorStats:
    mean: np.ndarray        # per RGB channel
    std: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray    # excess

    def as_vector(self) -> np.ndarray:
        """Channel-major: R mean, R std, R skew, R kurt, G mean, ..."""
        return np.stack([self.mean, self.std, self.skewness, self.kurtosis], axis=1).ravel()


def _check(img, mask):
    if mask.shape != img.shape[:2]:
        raise ValueError(f"mask shape {mask.shape} does not match image {img.shape[:2]}")
    if not mask.any():
        raise ValueError("empty mask")


def color_stats(img: np.ndarray, mask: np.ndarray) -> ColorStats:
    """Population moments of each channel over foreground pixels.

    A constant channel has skewness and excess kurtosis 0 by convention.
    """
    _check(img, mask)
    px = img[mask].astype(float)
    mean = px.mean(axis=0)
    d = px - mean
    m2 = (d ** 2).mean(axis=0)
    m3 = (d ** 3).mean(axis=0)
    m4 = (d ** 4).mean(axis=0)
    std = np.sqrt(m2)
    ok = m2 > _DEGENERATE_VAR
    safe = np.where(ok, m2, 1.0)
    skew = np.where(ok, m3 / safe ** 1.5, 0.0)
    kurt = np.where(ok, m4 / safe ** 2 - 3.0, 0.0)
    return ColorStats(mean, std, skew, kurt)


def entropy(img: np.ndarray, mask: np.ndarray) -> float:
    """Shannon entropy (bits) of the 256-bin foreground luminance histogram."""
    _check(img, mask)
    lum = luminance(img.astype(float))[mask]
    bins = np.clip(np.floor(lum * 255), 0, 255).astype(int)
    counts = np.bincount(bins, minlength=256)
    p = counts[counts > 0] / lum.size
    return float(max(0.0, -(p * np.log2(p)).sum()))
