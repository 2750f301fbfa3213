"""Model file: one JSON document with config, scaler and weights.

Floats are written with ``repr`` precision so a save/load cycle is exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..features.fusion import LAYOUT_VERSION, FeatureScaler
from .network import ModelConfig, NetworkModel, param_shapes

MODEL_LAYOUT = "datesort-model/1"


class ModelFileError(ValueError):
    pass


def model_to_dict(model: NetworkModel) -> dict:
    return {
        "layout": MODEL_LAYOUT,
        "feature_layout": LAYOUT_VERSION,
        "config": model.config.to_dict(),
        "scaler": model.scaler.to_dict(),
        "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in model.params.items()},
    }


def model_from_dict(d: dict) -> NetworkModel:
    if d.get("layout") != MODEL_LAYOUT:
        raise ModelFileError(f"unknown model layout {d.get('layout')!r}")
    if d.get("feature_layout") != LAYOUT_VERSION:
        raise ModelFileError(f"unknown feature layout {d.get('feature_layout')!r}")
    try:
        config = ModelConfig.from_dict(d["config"])
        config.validate()
        expected = param_shapes(config)
        params = {}
        for name, shape in expected.items():
            rec = d["params"][name]
            if tuple(rec["shape"]) != shape:
                raise ModelFileError(f"parameter {name} has shape {rec['shape']}, expected {list(shape)}")
            params[name] = np.array(rec["data"], dtype=float).reshape(shape)
        return NetworkModel(config, params, FeatureScaler.from_dict(d["scaler"]))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ModelFileError):
            raise
        raise ModelFileError(f"invalid model file: {e}") from None


def save_model(model: NetworkModel, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model_to_dict(model)) + "\n")
    return path


def load_model(path) -> NetworkModel:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ModelFileError(f"cannot read model file {path}: {e}") from None
    return model_from_dict(d)
