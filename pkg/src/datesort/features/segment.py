from __future__ import annotations

import numpy as np
from scipy import ndimage


class ExtractionError(ValueError):
    """The fruit could not be measured in this image."""

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def luminance(img: np.ndarray) -> np.ndarray:
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep the largest 4-connected component (first in raster order on ties)."""
    labels, n = ndimage.label(mask, structure=FOUR_CONNECTED)
    if n == 0:
        return np.zeros_like(mask, dtype=bool)
    sizes = np.bincount(labels.ravel())[1:]
    return labels == (int(np.argmax(sizes)) + 1)


def segment(img: np.ndarray, threshold: float = 0.1) -> np.ndarray:
    """Foreground mask of a normalised image.

    The background level is the median luminance of the one-pixel border;
    pixels whose luminance differs from it by more than ``threshold`` are
    foreground, and only the largest connected blob is kept.
    """
    if img.dtype == np.uint8:
        raise ValueError("segment expects a normalised image")
    lum = luminance(img)
    border = np.concatenate([lum[0], lum[-1], lum[1:-1, 0], lum[1:-1, -1]])
    fg = np.abs(lum - np.median(border)) > threshold
    mask = largest_component(fg)
    if not mask.any():
        raise ExtractionError("no fruit detected")
    return mask
