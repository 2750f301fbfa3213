"""Synthetic date-fruit simulator and conveyor with environmental drift."""

from .conveyor import DriftConfig, DriftState, apply_drift, conveyor_stream, drift_step, reflect
from .generator import (
    FruitSample,
    IntrinsicAttributes,
    SimulatorConfig,
    expected_moisture,
    generate_dataset,
    generate_sample,
    noiseless_reflectance,
    reference_counts,
    shelf_life_days,
)
from .storage import DatasetError, load_dataset, save_dataset
from .tables import N_VARIETIES, REFERENCE_COUNTS, Ripeness, Variety

__all__ = [
    "DatasetError", "DriftConfig", "DriftState", "FruitSample", "IntrinsicAttributes",
    "N_VARIETIES", "REFERENCE_COUNTS", "Ripeness", "SimulatorConfig", "Variety", "apply_drift",
    "conveyor_stream", "drift_step", "expected_moisture", "generate_dataset", "generate_sample",
    "load_dataset", "noiseless_reflectance", "reference_counts", "reflect", "save_dataset",
    "shelf_life_days",
]
