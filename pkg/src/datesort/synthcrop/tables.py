"""Generative constants for the synthetic date simulator.

All numbers here are invented. They are chosen so that varieties differ in
colour, shape and spectral curve, ripeness and spoilage leave visible and
spectral traces, and moisture/sugar are linearly recoverable from the
calibrated spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class Variety(IntEnum):
    IRAQI = 0
    ROTANA = 1
    DEGLET = 2
    BERHI = 3
    AJWA = 4
    MEDJOOL_RUTAB = 5
    SUKKARY_RUTAB = 6
    SUKKARY_DRIED = 7


class Ripeness(IntEnum):
    KHALAL = 0
    RUTAB = 1
    TAMAR = 2


N_VARIETIES = len(Variety)


@dataclass(frozen=True)
class VarietyProfile:
    color: tuple[int, int, int]       # 8-bit RGB at the tamar stage
    semi_major: float                 # px on a 64-px canvas
    aspect: float                     # major / minor
    speckle: float                    # 8-bit noise sigma on the fruit surface
    curve: tuple[float, float, float, float]   # low, high, edge centre nm, edge width nm
    bump: tuple[float, float]         # centre nm, amplitude
    moisture: float                   # tamar-stage means
    tss: float
    sugar: float
    tannin: float
    ph: float
    firmness: float
    ripeness_p: tuple[float, float, float]     # P(khalal), P(rutab), P(tamar)


PROFILES: dict[Variety, VarietyProfile] = {
    Variety.IRAQI: VarietyProfile((197, 137, 69), 17.0, 1.70, 7.0, (0.10, 0.55, 620, 35), (530, 0.04),
                                  22.0, 70.0, 68.0, 2.5, 5.9, 3.5, (0.10, 0.25, 0.65)),
    Variety.ROTANA: VarietyProfile((179, 121, 103), 15.0, 1.35, 9.0, (0.08, 0.45, 660, 40), (600, -0.03),
                                   20.0, 72.0, 70.0, 2.0, 6.1, 3.0, (0.10, 0.25, 0.65)),
    Variety.DEGLET: VarietyProfile((220, 146, 78), 19.0, 2.00, 5.0, (0.14, 0.62, 600, 30), (480, 0.03),
                                   24.0, 68.0, 64.0, 3.0, 5.7, 4.0, (0.10, 0.25, 0.65)),
    Variety.BERHI: VarietyProfile((204, 168, 63), 14.0, 1.20, 6.0, (0.18, 0.58, 560, 30), (680, -0.05),
                                  25.0, 74.0, 72.0, 3.5, 5.8, 3.2, (0.55, 0.25, 0.20)),
    Variety.AJWA: VarietyProfile((139, 108, 112), 13.0, 1.30, 11.0, (0.05, 0.35, 700, 45), (560, 0.02),
                                 19.0, 71.0, 69.0, 4.0, 6.0, 4.5, (0.00, 0.20, 0.80)),
    Variety.MEDJOOL_RUTAB: VarietyProfile((184, 112, 81), 22.0, 1.60, 8.0, (0.09, 0.50, 640, 50), (730, 0.04),
                                          23.0, 73.0, 71.0, 1.5, 6.2, 2.8, (0.00, 0.85, 0.15)),
    Variety.SUKKARY_RUTAB: VarietyProfile((213, 157, 85), 16.0, 1.25, 6.0, (0.16, 0.66, 590, 40), (800, -0.04),
                                          21.0, 76.0, 74.0, 1.8, 6.3, 2.5, (0.00, 0.85, 0.15)),
    Variety.SUKKARY_DRIED: VarietyProfile((190, 140, 99), 15.0, 1.40, 12.0, (0.12, 0.52, 610, 40), (450, 0.05),
                                          14.0, 78.0, 76.0, 2.2, 6.0, 6.0, (0.00, 0.00, 1.00)),
}

# Additive attribute offsets relative to the tamar stage:
# moisture, tss, sugar, tannin, ph, firmness.
RIPENESS_ATTR_OFFSET = {
    Ripeness.KHALAL: np.array([25.0, -15.0, -15.0, 4.0, -0.3, 7.0]),
    Ripeness.RUTAB: np.array([12.0, -6.0, -6.0, 1.5, -0.1, 2.0]),
    Ripeness.TAMAR: np.zeros(6),
}
ATTR_NOISE = np.array([1.5, 2.0, 2.0, 0.3, 0.1, 0.3])

# Per-channel colour multipliers and size factor by ripeness.
RIPENESS_COLOR = {
    Ripeness.KHALAL: np.array([1.04, 1.12, 0.85]),
    Ripeness.RUTAB: np.array([1.0, 1.0, 1.0]),
    Ripeness.TAMAR: np.array([0.93, 0.92, 0.95]),
}
RIPENESS_SIZE = {Ripeness.KHALAL: 1.05, Ripeness.RUTAB: 1.0, Ripeness.TAMAR: 0.94}

SPOIL_MOISTURE_SHIFT = 6.0
SPOIL_FIRMNESS_FACTOR = 0.6
SPOIL_TANNIN_FACTOR = 0.8
BLOTCH_DEPTH = 0.45          # fractional darkening at a blotch centre
SPOIL_SPECTRAL_SCALE = 0.5   # multiplier on the spoilage spectral signature

BACKGROUND_RGB = (14.0, 14.0, 16.0)

# Spectral model coefficients (reflectance units).
MOISTURE_REF = 30.0
MOISTURE_COEF = -0.004      # per % moisture, times water band shape
SUGAR_REF = 65.0
SUGAR_COEF = -0.003         # per % sugar, times sugar band shape
TSS_REF = 65.0
TSS_COEF = 0.0015           # per degree Brix, times tss band shape

DEFAULT_DARK = 300.0 + 12.0 * np.arange(18)
DEFAULT_WHITE = 32000.0 + 4000.0 * np.sin(np.linspace(0.3, 2.8, 18))

REFERENCE_COUNTS: dict[Variety, int] = {
    Variety.IRAQI: 72,
    Variety.ROTANA: 166,
    Variety.DEGLET: 98,
    Variety.BERHI: 65,
    Variety.AJWA: 50,
    Variety.MEDJOOL_RUTAB: 135,
    Variety.SUKKARY_RUTAB: 122,
    Variety.SUKKARY_DRIED: 276,
}
