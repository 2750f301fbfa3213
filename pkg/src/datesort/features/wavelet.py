"""Two-level 2-D Daubechies-4 transform with periodic extension.

Analysis at position i of a length-N signal:

    approx[i] = sum_k h[k] x[(2i + k) mod N]
    detail[i] = sum_k g[k] x[(2i + k) mod N],   g[k] = (-1)^k h[3 - k]

Each level filters rows (horizontal direction) and then columns. Subband
names give the horizontal filter first: LH is low horizontally and high
vertically.
"""

from __future__ import annotations

import math

import numpy as np

from ..preprocess import resize
from .segment import ExtractionError, luminance

_S3 = math.sqrt(3.0)
DAUB4_LOW = np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * math.sqrt(2.0))
DAUB4_HIGH = np.array([(-1) ** k * DAUB4_LOW[3 - k] for k in range(4)])

CROP_SIZE = 32
SUBBANDS = ("LL2", "LH1", "HL1", "HH1", "LH2", "HL2", "HH2")


def dwt1(x: np.ndarray, axis: int = -1) -> tuple[np.ndarray, np.ndarray]:
    """Single-level periodic D4 analysis along ``axis`` (even length >= 4)."""
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    n = x.shape[-1]
    if n < 4 or n % 2:
        raise ValueError(f"D4 needs an even length >= 4, got {n}")
    base = 2 * np.arange(n // 2)
    taps = [x[..., (base + k) % n] for k in range(4)]
    approx = sum(DAUB4_LOW[k] * taps[k] for k in range(4))
    # The high-pass taps sum to zero, so the detail is written on differences
    # from the last tap; flat input then yields exact zeros instead of rounding dust.
    detail = sum(DAUB4_HIGH[k] * (taps[k] - taps[3]) for k in range(3))
    return np.moveaxis(approx, -1, axis), np.moveaxis(detail, -1, axis)


def dwt2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One 2-D level: returns (LL, LH, HL, HH)."""
    lo, hi = dwt1(x, axis=1)
    ll, lh = dwt1(lo, axis=0)
    hl, hh = dwt1(hi, axis=0)
    return ll, lh, hl, hh


def wavedec2(x: np.ndarray, levels: int = 2) -> list[np.ndarray]:
    """Coefficients ordered [LL_L, LH_1, HL_1, HH_1, ..., LH_L, HL_L, HH_L]."""
    approx = np.asarray(x, dtype=float)
    details = []
    for _ in range(levels):
        approx, lh, hl, hh = dwt2(approx)
        details += [lh, hl, hh]
    return [approx] + details


def subband_energies(x: np.ndarray, levels: int = 2) -> np.ndarray:
    """Mean squared coefficient per subband, in ``SUBBANDS`` order."""
    return np.array([float(np.mean(c ** 2)) for c in wavedec2(x, levels)])


def crop_gray(img: np.ndarray, mask: np.ndarray, size: int = CROP_SIZE) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
    if y1 - y0 < 4 or x1 - x0 < 4:
        raise ExtractionError("fruit bounding box smaller than 4x4")
    crop = resize(img[y0:y1, x0:x1].astype(float), size, size)
    return luminance(crop)


def daub4_energies(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Seven subband energies of the fruit's 32x32 grayscale bounding-box crop."""
    return subband_energies(crop_gray(img, mask), levels=2)
