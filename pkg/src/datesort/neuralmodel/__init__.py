"""From-scratch numpy CNN with variety, spoilage and shelf-life heads."""

from .network import (
    N_CLASSES,
    SHELF_SCALE,
    ConvBlock,
    DivergenceError,
    Labels,
    ModelConfig,
    NetworkModel,
    Outputs,
    backward,
    forward,
    init,
    loss_and_grads,
    losses,
    param_shapes,
)
from .serialize import ModelFileError, load_model, model_from_dict, model_to_dict, save_model
from .training import (
    CVResult,
    Prediction,
    TrainData,
    TrainReport,
    augment,
    decide,
    kfold_cv,
    predict,
    stratified_folds,
    train,
)

__all__ = [
    "CVResult", "ConvBlock", "DivergenceError", "Labels", "ModelConfig", "ModelFileError",
    "N_CLASSES", "NetworkModel", "Outputs", "Prediction", "SHELF_SCALE", "TrainData",
    "TrainReport", "augment", "backward", "decide", "forward", "init", "kfold_cv",
    "load_model", "loss_and_grads", "losses", "model_from_dict", "model_to_dict", "param_shapes",
    "predict", "save_model", "stratified_folds", "train",
]
