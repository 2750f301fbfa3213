"""Image and spectral preprocessing.

Images are plain numpy arrays of shape (height, width, 3). The dtype marks
the stage: ``uint8`` is a raw 8-bit capture, floating point is a processed
image with values in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_CHANNELS = 18
RAW = "RAW"
CALIBRATED = "CALIBRATED"
REFLECTANCE_CEIL = 1.2

# AS7265x channel centres, nm.
WAVELENGTHS = np.array(
    [410, 435, 460, 485, 510, 535, 560, 585, 610, 645, 680, 705, 730, 760, 810, 860, 900, 940],
    dtype=float,
)


@dataclass(frozen=True)
class SpectralReading:
    values: np.ndarray
    kind: str = RAW

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (N_CHANNELS,):
            raise ValueError(f"spectral reading must have {N_CHANNELS} channels, got shape {v.shape}")
        if self.kind not in (RAW, CALIBRATED):
            raise ValueError(f"unknown spectral kind {self.kind!r}")
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, SpectralReading):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class CalibrationReference:
    dark: np.ndarray
    white: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dark", np.asarray(self.dark, dtype=float))
        object.__setattr__(self, "white", np.asarray(self.white, dtype=float))

    def shifted(self, offset: np.ndarray) -> "CalibrationReference":
        """Reference re-measured under an additive baseline ``offset`` (raw counts)."""
        return CalibrationReference(self.dark + offset, self.white + offset)


def _check_image(img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image dimensions must be >= 1")


def resize(img: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Bilinear resize with pixel-centre alignment.

    Output pixel ``x`` samples the source at ``(x + 0.5) * W / w - 0.5``,
    clamped to the source grid. A raw ``uint8`` input gives a rounded
    ``uint8`` output; float input stays float.
    """
    _check_image(img)
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {target_w}x{target_h}")
    h, w = img.shape[:2]
    if (w, h) == (target_w, target_h):
        return img.copy()

    def axis_weights(n_src, n_dst):
        pos = (np.arange(n_dst) + 0.5) * (n_src / n_dst) - 0.5
        pos = np.clip(pos, 0.0, n_src - 1)
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, n_src - 1)
        return lo, hi, pos - lo

    y0, y1, fy = axis_weights(h, target_h)
    x0, x1, fx = axis_weights(w, target_w)
    src = img.astype(float)
    fx = fx[None, :, None]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy[:, None, None]) + bot * fy[:, None, None]
    if img.dtype == np.uint8:
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out


def normalize(img: np.ndarray) -> np.ndarray:
    """Scale a raw 8-bit image to [0, 1]."""
    _check_image(img)
    if img.dtype != np.uint8:
        raise ValueError("double normalization: input is not a raw 8-bit image")
    return img.astype(float) / 255.0


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3 * sigma))
    x = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(img: np.ndarray, sigma: float = 0.8) -> np.ndarray:
    """Separable Gaussian blur, radius ceil(3*sigma), reflect padding."""
    _check_image(img)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    src = img.astype(float)
    if sigma == 0:
        return src
    k = gaussian_kernel(sigma)
    r = len(k) // 2
    h, w = src.shape[:2]

    padded = np.pad(src, ((r, r), (0, 0), (0, 0)), mode="reflect")
    tmp = sum(k[i] * padded[i:i + h] for i in range(len(k)))
    padded = np.pad(tmp, ((0, 0), (r, r), (0, 0)), mode="reflect")
    return sum(k[i] * padded[:, i:i + w] for i in range(len(k)))


def calibrate_spectral(raw: SpectralReading, ref: CalibrationReference) -> SpectralReading:
    """Dark/white reference calibration to reflectance, clamped to [0, 1.2]."""
    if raw.kind != RAW:
        raise ValueError("calibrate_spectral expects a RAW reading")
    span = ref.white - ref.dark
    if np.any(span <= 0):
        raise ValueError("degenerate reference: white must exceed dark on every channel")
    refl = (raw.values - ref.dark) / span
    return SpectralReading(np.clip(refl, 0.0, REFLECTANCE_CEIL), CALIBRATED)


def preprocess_image(img: np.ndarray, size: int | None = None, sigma: float = 0.8,
                     gain: float = 1.0) -> np.ndarray:
    """Resize, normalise, apply a calibration gain, then smooth.

    ``gain`` models the runtime brightness correction; the product is
    clamped to [0, 1] before smoothing.
    """
    if size is not None and img.shape[:2] != (size, size):
        img = resize(img, size, size)
    out = normalize(img)
    if gain != 1.0:
        out = np.clip(out * gain, 0.0, 1.0)
    return gaussian_smooth(out, sigma)
