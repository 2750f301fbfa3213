"""Dataset directory layout.

::

    manifest.json      ids, labels, attributes, seeds, simulator config echo
    img/<id>.ppm       plain-text P3, 8-bit
    spec/<id>.csv      18 raw sensor values, 6 decimals

Raw spectral counts are stored (not reflectance) so that calibration stays a
pipeline step; the dark/white reference is echoed in the manifest.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..preprocess import WAVELENGTHS, SpectralReading
from .generator import FruitSample, IntrinsicAttributes, SimulatorConfig
from .tables import Ripeness, Variety

FORMAT = "datesort-dataset/1"


class DatasetError(ValueError):
    pass


def write_ppm(path: Path, img: np.ndarray) -> None:
    h, w, _ = img.shape
    rows = img.reshape(h, w * 3)
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in rows)
    path.write_text(f"P3\n{w} {h}\n255\n{body}\n")


def read_ppm(path: Path) -> np.ndarray:
    try:
        tokens = path.read_text().split()
    except OSError as e:
        raise DatasetError(f"cannot read image {path}: {e}") from None
    try:
        if tokens[0] != "P3" or int(tokens[3]) != 255:
            raise ValueError("not an 8-bit P3 file")
        w, h = int(tokens[1]), int(tokens[2])
        vals = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
        if vals.size != w * h * 3 or vals.min(initial=0) < 0 or vals.max(initial=0) > 255:
            raise ValueError("pixel payload does not match header")
    except (ValueError, IndexError) as e:
        raise DatasetError(f"corrupted image file {path}: {e}") from None
    return vals.astype(np.uint8).reshape(h, w, 3)


def write_spectral(path: Path, reading: SpectralReading) -> None:
    lines = ["wavelength_nm,value"]
    lines += [f"{int(nm)},{v:.6f}" for nm, v in zip(WAVELENGTHS, reading.values)]
    path.write_text("\n".join(lines) + "\n")


def read_spectral(path: Path) -> SpectralReading:
    try:
        lines = path.read_text().strip().splitlines()
        vals = [float(line.split(",")[1]) for line in lines[1:]]
        return SpectralReading(np.array(vals))
    except (ValueError, IndexError) as e:
        raise DatasetError(f"corrupted spectral file {path}: {e}") from None


def manifest_dict(samples: list[FruitSample], seed: int, config: SimulatorConfig) -> dict:
    counts: dict[str, int] = {}
    for s in samples:
        counts[s.variety.name] = counts.get(s.variety.name, 0) + 1
    return {
        "format": FORMAT,
        "seed": seed,
        "config": {**config.to_dict(), "dark": config.dark.tolist(), "white": config.white.tolist()},
        "counts": counts,
        "total": len(samples),
        "samples": [
            {"id": s.id, "variety": s.variety.name, "variety_code": int(s.variety),
             "ripeness": s.ripeness.name, "seed": s.seed, "attrs": s.attrs.as_dict()}
            for s in samples
        ],
    }


def save_dataset(samples: list[FruitSample], out_dir, seed: int,
                 config: SimulatorConfig | None = None) -> list[Path]:
    """Write the dataset layout; returns the written paths in write order."""
    config = config or SimulatorConfig()
    out = Path(out_dir)
    (out / "img").mkdir(parents=True, exist_ok=True)
    (out / "spec").mkdir(parents=True, exist_ok=True)
    written = []
    for s in samples:
        p = out / "img" / f"{s.id}.ppm"
        write_ppm(p, s.image)
        q = out / "spec" / f"{s.id}.csv"
        write_spectral(q, s.spectral)
        written += [p, q]
    m = out / "manifest.json"
    m.write_text(json.dumps(manifest_dict(samples, seed, config), indent=1) + "\n")
    written.append(m)
    return written


def load_dataset(path) -> tuple[list[FruitSample], SimulatorConfig, dict]:
    root = Path(path)
    mpath = root / "manifest.json"
    if not mpath.is_file():
        raise DatasetError(f"no manifest.json in {root}")
    try:
        manifest = json.loads(mpath.read_text())
    except json.JSONDecodeError as e:
        raise DatasetError(f"corrupted manifest {mpath}: {e}") from None
    if manifest.get("format") != FORMAT:
        raise DatasetError(f"unsupported dataset format {manifest.get('format')!r}")
    c = manifest["config"]
    config = SimulatorConfig(c["image_size"], c["spoil_prob"], c["spectral_noise"], c["separation"],
                             c["tamar_moisture_max"], np.array(c["dark"]), np.array(c["white"]))
    samples = []
    for rec in manifest["samples"]:
        sid = rec["id"]
        img_path = root / "img" / f"{sid}.ppm"
        spec_path = root / "spec" / f"{sid}.csv"
        if not img_path.is_file():
            raise DatasetError(f"missing image for sample id {sid}: {img_path}")
        if not spec_path.is_file():
            raise DatasetError(f"missing spectral CSV for sample id {sid}: {spec_path}")
        attrs = IntrinsicAttributes(**rec["attrs"])
        samples.append(FruitSample(sid, Variety[rec["variety"]], Ripeness[rec["ripeness"]], attrs,
                                   read_ppm(img_path), read_spectral(spec_path), rec["seed"]))
    return samples, config, manifest
