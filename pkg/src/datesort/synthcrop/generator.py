from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..preprocess import WAVELENGTHS, CalibrationReference, SpectralReading
from ..seeding import derive_seed
from . import tables as T
from .tables import N_VARIETIES, PROFILES, Ripeness, Variety


@dataclass(frozen=True)
class IntrinsicAttributes:
    moisture: float
    tss: float
    sugar: float
    tannin: float
    ph: float
    firmness: float
    days_to_expiry: int
    spoiled: bool

    def __post_init__(self):
        if not 0 <= self.moisture <= 100:
            raise ValueError(f"moisture out of range: {self.moisture}")
        if self.tss < 0 or not 0 <= self.sugar <= 100 or self.tannin < 0:
            raise ValueError("tss/sugar/tannin out of range")
        if not 0 <= self.ph <= 14 or self.firmness <= 0:
            raise ValueError("ph/firmness out of range")
        if self.days_to_expiry < 0 or (self.spoiled and self.days_to_expiry != 0):
            raise ValueError("spoiled samples must have days_to_expiry == 0")

    def as_dict(self) -> dict:
        return {
            "moisture": self.moisture, "tss": self.tss, "sugar": self.sugar,
            "tannin": self.tannin, "ph": self.ph, "firmness": self.firmness,
            "days_to_expiry": self.days_to_expiry, "spoiled": self.spoiled,
        }


@dataclass(eq=False)
class FruitSample:
    id: int
    variety: Variety
    ripeness: Ripeness
    attrs: IntrinsicAttributes
    image: np.ndarray               # (h, w, 3) uint8
    spectral: SpectralReading       # RAW counts
    seed: int

    def __eq__(self, other):
        if not isinstance(other, FruitSample):
            return NotImplemented
        return (self.id == other.id and self.variety == other.variety
                and self.ripeness == other.ripeness and self.attrs == other.attrs
                and self.seed == other.seed and self.spectral == other.spectral
                and self.image.dtype == other.image.dtype
                and np.array_equal(self.image, other.image))


@dataclass
class SimulatorConfig:
    image_size: int = 64
    spoil_prob: float = 0.1
    spectral_noise: float = 0.004
    separation: float = 1.0
    tamar_moisture_max: float = 35.0
    dark: np.ndarray = field(default_factory=lambda: T.DEFAULT_DARK.copy())
    white: np.ndarray = field(default_factory=lambda: T.DEFAULT_WHITE.copy())

    @property
    def reference(self) -> CalibrationReference:
        return CalibrationReference(self.dark, self.white)

    def to_dict(self) -> dict:
        return {
            "image_size": self.image_size, "spoil_prob": self.spoil_prob,
            "spectral_noise": self.spectral_noise, "separation": self.separation,
            "tamar_moisture_max": self.tamar_moisture_max,
        }


def _gauss(center, width):
    return np.exp(-(((WAVELENGTHS - center) / width) ** 2))


WATER_BAND = _gauss(940, 50) + 0.35 * _gauss(760, 30)
SUGAR_BAND = _gauss(880, 40)
TSS_BAND = _gauss(680, 40)
SPOIL_SIGNATURE = 0.05 * _gauss(450, 60) - 0.06 * _gauss(640, 80) + 0.03 * _gauss(860, 60)
RIPENESS_SPECTRAL = {
    Ripeness.KHALAL: 0.05 * _gauss(560, 40) - 0.01,
    Ripeness.RUTAB: np.zeros(18),
    Ripeness.TAMAR: np.full(18, -0.02),
}


def _variety_curve(v: Variety) -> np.ndarray:
    p = PROFILES[v]
    lo, hi, c, w = p.curve
    curve = lo + (hi - lo) / (1.0 + np.exp(-(WAVELENGTHS - c) / w))
    return curve + p.bump[1] * _gauss(p.bump[0], 30)


_BASE_CURVES = np.stack([_variety_curve(v) for v in Variety])
_MEAN_CURVE = _BASE_CURVES.mean(axis=0)


def base_reflectance(variety: Variety, separation: float = 1.0) -> np.ndarray:
    """Variety curve pulled toward the across-variety mean by ``separation``."""
    return _MEAN_CURVE + separation * (_BASE_CURVES[int(variety)] - _MEAN_CURVE)


def noiseless_reflectance(variety, ripeness, moisture, tss, sugar, spoiled, separation=1.0):
    r = base_reflectance(variety, separation) + RIPENESS_SPECTRAL[ripeness]
    r = r + T.MOISTURE_COEF * (moisture - T.MOISTURE_REF) * WATER_BAND
    r = r + T.SUGAR_COEF * (sugar - T.SUGAR_REF) * SUGAR_BAND
    r = r + T.TSS_COEF * (tss - T.TSS_REF) * TSS_BAND
    if spoiled:
        r = r + T.SPOIL_SPECTRAL_SCALE * SPOIL_SIGNATURE
    return r


def shelf_life_days(moisture: float, tannin: float, firmness: float, eps: float) -> int:
    d = round(40 - 0.8 * (moisture - 20) + 1.5 * tannin - 4.0 * (3.0 - firmness) + eps)
    return int(min(365, max(0, d)))


def expected_moisture(variety: Variety, ripeness: Ripeness, spoil_prob: float) -> float:
    """Mean moisture implied by the config, ignoring the tamar clamp."""
    p = PROFILES[variety]
    return p.moisture + T.RIPENESS_ATTR_OFFSET[ripeness][0] + spoil_prob * T.SPOIL_MOISTURE_SHIFT


def _render(rng, variety, ripeness, spoiled, size):
    p = PROFILES[variety]
    scale = size / 64.0
    cx = size / 2 + rng.uniform(-3, 3) * scale
    cy = size / 2 + rng.uniform(-3, 3) * scale
    theta = rng.uniform(0, math.pi)
    s = rng.uniform(0.94, 1.06) * T.RIPENESS_SIZE[ripeness]
    a = p.semi_major * s * scale
    b = a / p.aspect
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    ss = 4
    offs = (np.arange(ss) + 0.5) / ss
    ys = (np.arange(size)[:, None] + offs[None, :]).ravel()
    xs = ys.copy()
    X, Y = np.meshgrid(xs - cx, ys - cy)
    u = X * cos_t + Y * sin_t
    v = -X * sin_t + Y * cos_t
    inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    coverage = inside.reshape(size, ss, size, ss).mean(axis=(1, 3))

    # pixel-centre coordinates in the fruit frame
    Xc, Yc = np.meshgrid(np.arange(size) + 0.5 - cx, np.arange(size) + 0.5 - cy)
    uc = Xc * cos_t + Yc * sin_t
    vc = -Xc * sin_t + Yc * cos_t

    color = np.asarray(p.color, float) * T.RIPENESS_COLOR[ripeness]
    # radial shading: slightly darker toward the rim
    rho2 = np.clip((uc / a) ** 2 + (vc / b) ** 2, 0, 1)
    shade = 1.05 - 0.12 * rho2
    phase = rng.uniform(0, 2 * math.pi)
    if ripeness == Ripeness.TAMAR:
        # drying wrinkles across the minor axis
        shade = shade * (1 + 0.06 * np.sin(2 * math.pi * vc / (3.5 * scale) + phase))
    fruit = color[None, None, :] * shade[:, :, None]

    n_blot = int(rng.integers(2, 5))
    blot_params = rng.uniform(size=(n_blot, 3))
    if spoiled:
        dark = np.ones((size, size))
        for r_frac, ang_frac, rad_frac in blot_params:
            rr = 0.6 * math.sqrt(r_frac)
            ang = 2 * math.pi * ang_frac
            bu, bv = rr * a * math.cos(ang), rr * b * math.sin(ang)
            rad = (0.25 + 0.25 * rad_frac) * b
            d2 = ((uc - bu) ** 2 + (vc - bv) ** 2) / rad ** 2
            dark = dark * (1 - T.BLOTCH_DEPTH * np.exp(-d2 * 1.5))
        fruit = fruit * 0.96 * dark[:, :, None]

    speckle = rng.normal(0.0, p.speckle, size=(size, size, 3))
    bg_noise = rng.normal(0.0, 1.5, size=(size, size, 3))
    fruit = fruit + speckle
    bg = np.asarray(T.BACKGROUND_RGB)[None, None, :] + bg_noise
    img = coverage[:, :, None] * fruit + (1 - coverage[:, :, None]) * bg
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def generate_sample(variety: Variety, ripeness: Ripeness, seed: int,
                    config: SimulatorConfig | None = None, sample_id: int = 0) -> FruitSample:
    """Generate one synthetic date; a pure function of its arguments."""
    if seed < 0:
        raise ValueError("seed must be >= 0")
    cfg = config or SimulatorConfig()
    variety = Variety(variety)
    ripeness = Ripeness(ripeness)
    rng = np.random.default_rng(seed)
    p = PROFILES[variety]

    spoiled = bool(rng.uniform() < cfg.spoil_prob)
    base = np.array([p.moisture, p.tss, p.sugar, p.tannin, p.ph, p.firmness])
    vals = base + T.RIPENESS_ATTR_OFFSET[ripeness] + rng.normal(0.0, 1.0, 6) * T.ATTR_NOISE
    if spoiled:
        vals[0] += T.SPOIL_MOISTURE_SHIFT
        vals[3] *= T.SPOIL_TANNIN_FACTOR
        vals[5] *= T.SPOIL_FIRMNESS_FACTOR
    moisture = float(np.clip(vals[0], 0.0, 100.0))
    if ripeness == Ripeness.TAMAR:
        moisture = min(moisture, cfg.tamar_moisture_max - 0.1)
    tss = float(max(vals[1], 0.0))
    sugar = float(np.clip(vals[2], 0.0, 100.0))
    tannin = float(max(vals[3], 0.0))
    ph = float(np.clip(vals[4], 0.0, 14.0))
    firmness = float(max(vals[5], 0.1))
    eps = float(rng.normal(0.0, 2.0))
    days = 0 if spoiled else shelf_life_days(moisture, tannin, firmness, eps)
    attrs = IntrinsicAttributes(moisture, tss, sugar, tannin, ph, firmness, days, spoiled)

    image = _render(rng, variety, ripeness, spoiled, cfg.image_size)

    refl = noiseless_reflectance(variety, ripeness, moisture, tss, sugar, spoiled, cfg.separation)
    refl = refl + rng.normal(0.0, cfg.spectral_noise, 18)
    raw = cfg.dark + refl * (cfg.white - cfg.dark)
    spectral = SpectralReading(np.round(raw, 6))
    return FruitSample(sample_id, variety, ripeness, attrs, image, spectral, int(seed))


def resolve_counts(counts) -> dict[Variety, int]:
    if not counts:
        raise ValueError("empty dataset spec")
    out = {}
    for k, n in counts.items():
        v = Variety[k] if isinstance(k, str) else Variety(k)
        if int(n) < 1:
            raise ValueError(f"count for {v.name} must be >= 1, got {n}")
        out[v] = int(n)
    return dict(sorted(out.items()))


def generate_dataset(counts, seed: int, config: SimulatorConfig | None = None) -> list[FruitSample]:
    """Generate ``counts[variety]`` samples per variety, ids contiguous from 0.

    Varieties are emitted in code order. Sample ``i`` uses seed
    ``derive_seed(seed, "sample", i)``; its ripeness is drawn from the
    variety's ripeness distribution with ``derive_seed(seed, "ripeness", i)``.
    """
    resolved = resolve_counts(counts)
    out = []
    i = 0
    for v, n in resolved.items():
        probs = np.asarray(PROFILES[v].ripeness_p)
        for _ in range(n):
            r_rng = np.random.default_rng(derive_seed(seed, "ripeness", i))
            ripeness = Ripeness(int(r_rng.choice(3, p=probs)))
            out.append(generate_sample(v, ripeness, derive_seed(seed, "sample", i), config, sample_id=i))
            i += 1
    return out


def reference_counts() -> dict[Variety, int]:
    return dict(T.REFERENCE_COUNTS)


assert len(PROFILES) == N_VARIETIES
