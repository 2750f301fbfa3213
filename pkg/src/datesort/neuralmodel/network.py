from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from ..features.fusion import N_FEATURES, FeatureScaler
from . import layers as L

N_CLASSES = 8
SHELF_SCALE = 365.0


class DivergenceError(FloatingPointError):
    pass


@dataclass
class ConvBlock:
    filters: int = 8
    kernel: int = 3


@dataclass
class ModelConfig:
    input_size: int = 64
    conv_blocks: list[ConvBlock] = field(default_factory=lambda: [ConvBlock(8, 3), ConvBlock(16, 3)])
    dense_widths: list[int] = field(default_factory=lambda: [64])
    learning_rate: float = 0.01
    batch_size: int = 32
    epochs: int = 20
    momentum: float = 0.9
    augment_flip: bool = True
    augment_brightness: bool = True
    augment_rotate: bool = True
    spoil_weight: float = 1.0
    shelf_weight: float = 1.0
    feature_mask: list[bool] | None = None
    seed: int = 0

    def validate(self) -> None:
        size = self.input_size
        for _ in self.conv_blocks:
            size //= 2
        if size < 1:
            raise ValueError("config shrinks feature map to zero")
        if not 1 <= len(self.conv_blocks) <= 4:
            raise ValueError(f"conv_blocks must number 1..4, got {len(self.conv_blocks)}")
        for blk in self.conv_blocks:
            if blk.filters < 1 or blk.kernel not in (3, 5):
                raise ValueError(f"invalid conv block {blk}")
        if not self.dense_widths or min(self.dense_widths) < 1:
            raise ValueError("dense_widths needs at least one positive width")
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning_rate >= 0, batch_size >= 1 and epochs >= 1 required")
        if self.feature_mask is not None and len(self.feature_mask) != N_FEATURES:
            raise ValueError(f"feature_mask must have {N_FEATURES} entries")

    @property
    def final_map(self) -> int:
        return self.input_size // (2 ** len(self.conv_blocks))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["conv_blocks"] = [ConvBlock(**b) for b in d.get("conv_blocks", [])]
        return cls(**d)


@dataclass
class Labels:
    variety: np.ndarray     # int codes
    spoiled: np.ndarray     # 0/1
    shelf_days: np.ndarray

    def subset(self, idx) -> "Labels":
        return Labels(self.variety[idx], self.spoiled[idx], self.shelf_days[idx])


@dataclass
class Outputs:
    variety_prob: np.ndarray    # (N, 8)
    spoil_prob: np.ndarray      # (N,)
    shelf_days: np.ndarray      # (N,), unbounded
    variety_logits: np.ndarray
    spoil_logit: np.ndarray
    shelf_scaled: np.ndarray


class NetworkModel:
    """Conv trunk + feature side input + three task heads.

    Parameters live in an insertion-ordered dict; names are
    ``conv{i}.W``, ``conv{i}.b``, ``dense{j}.W``, ``dense{j}.b``,
    ``variety.W``, ``variety.b``, ``spoil.W``, ``spoil.b``, ``shelf.W``, ``shelf.b``.
    """

    def __init__(self, config: ModelConfig, params: dict[str, np.ndarray],
                 scaler: FeatureScaler | None = None):
        self.config = config
        self.params = params
        self.scaler = scaler or FeatureScaler.identity()

    @property
    def feature_mask(self) -> np.ndarray:
        if self.config.feature_mask is None:
            return np.ones(N_FEATURES)
        return np.asarray(self.config.feature_mask, dtype=float)

    def copy(self) -> "NetworkModel":
        return NetworkModel(ModelConfig.from_dict(self.config.to_dict()),
                            {k: v.copy() for k, v in self.params.items()},
                            FeatureScaler(self.scaler.mean.copy(), self.scaler.std.copy()))

    def n_params(self) -> int:
        return sum(v.size for v in self.params.values())


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes = {}
    cin = 3
    for i, blk in enumerate(config.conv_blocks):
        shapes[f"conv{i}.W"] = (blk.kernel, blk.kernel, cin, blk.filters)
        shapes[f"conv{i}.b"] = (blk.filters,)
        cin = blk.filters
    width = config.final_map ** 2 * cin + N_FEATURES
    for j, d in enumerate(config.dense_widths):
        shapes[f"dense{j}.W"] = (width, d)
        shapes[f"dense{j}.b"] = (d,)
        width = d
    for head, n in (("variety", N_CLASSES), ("spoil", 1), ("shelf", 1)):
        shapes[f"{head}.W"] = (width, n)
        shapes[f"{head}.b"] = (n,)
    return shapes


def init(config: ModelConfig) -> NetworkModel:
    """He-normal weights (std sqrt(2 / fan_in)), zero biases, seeded."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    params = {}
    for name, shape in param_shapes(config).items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[:-1]))
            params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
    return NetworkModel(config, params)


def _check_batch(model, images, feats):
    s = model.config.input_size
    if images.ndim != 4 or images.shape[1:] != (s, s, 3):
        raise ValueError(f"image batch must be (N, {s}, {s}, 3), got {images.shape}")
    if feats.shape != (images.shape[0], N_FEATURES):
        raise ValueError(f"feature batch must be (N, {N_FEATURES}), got {feats.shape}")


def forward(model: NetworkModel, images: np.ndarray, feats: np.ndarray, keep_cache: bool = False):
    """Run the network on a batch of preprocessed images and raw feature vectors.

    Features are scaled with the model's scaler and multiplied by the
    feature mask before entering the dense stack. Returns ``Outputs``, plus
    the backward cache when ``keep_cache`` is set.
    """
    images = np.asarray(images, dtype=float)
    feats = np.asarray(feats, dtype=float)
    _check_batch(model, images, feats)
    P = model.params
    cache = {"convs": [], "denses": []}
    h = images
    for i in range(len(model.config.conv_blocks)):
        z, cc = L.conv2d_forward(h, P[f"conv{i}.W"], P[f"conv{i}.b"])
        a, rmask = L.relu_forward(z)
        h, pc = L.maxpool_forward(a)
        cache["convs"].append((cc, rmask, pc))
    n = images.shape[0]
    cache["trunk_shape"] = h.shape
    side = model.scaler.transform(feats) * model.feature_mask
    x = np.concatenate([h.reshape(n, -1), side], axis=1)
    for j in range(len(model.config.dense_widths)):
        z = x @ P[f"dense{j}.W"] + P[f"dense{j}.b"]
        a, rmask = L.relu_forward(z)
        cache["denses"].append((x, rmask))
        x = a
    cache["top"] = x
    vlog = x @ P["variety.W"] + P["variety.b"]
    slog = (x @ P["spoil.W"] + P["spoil.b"])[:, 0]
    shelf = (x @ P["shelf.W"] + P["shelf.b"])[:, 0]
    out = Outputs(L.softmax(vlog), L.sigmoid(slog), shelf * SHELF_SCALE, vlog, slog, shelf)
    return (out, cache) if keep_cache else out


def losses(model: NetworkModel, out: Outputs, labels: Labels) -> dict[str, float]:
    n = len(labels.variety)
    logp = out.variety_logits - out.variety_logits.max(axis=1, keepdims=True)
    logp = logp - np.log(np.exp(logp).sum(axis=1, keepdims=True))
    ce = -logp[np.arange(n), labels.variety].mean()
    bce = L.bce_with_logits(out.spoil_logit, labels.spoiled.astype(float)).mean()
    mse = ((out.shelf_scaled - labels.shelf_days / SHELF_SCALE) ** 2).mean()
    total = ce + model.config.spoil_weight * bce + model.config.shelf_weight * mse
    if not np.isfinite(total):
        raise DivergenceError("numerical divergence: non-finite loss")
    return {"total": float(total), "variety": float(ce), "spoilage": float(bce), "shelf_life": float(mse)}


def backward(model: NetworkModel, out: Outputs, cache: dict, labels: Labels) -> dict[str, np.ndarray]:
    """Gradients of the mean total loss with respect to every parameter."""
    losses(model, out, labels)
    P = model.params
    cfg = model.config
    n = len(labels.variety)
    onehot = np.zeros_like(out.variety_prob)
    onehot[np.arange(n), labels.variety] = 1.0
    d_vlog = (out.variety_prob - onehot) / n
    d_slog = cfg.spoil_weight * (out.spoil_prob - labels.spoiled) / n
    d_shelf = cfg.shelf_weight * 2.0 * (out.shelf_scaled - labels.shelf_days / SHELF_SCALE) / n

    grads = {}
    x = cache["top"]
    grads["variety.W"] = x.T @ d_vlog
    grads["variety.b"] = d_vlog.sum(axis=0)
    grads["spoil.W"] = x.T @ d_slog[:, None]
    grads["spoil.b"] = np.array([d_slog.sum()])
    grads["shelf.W"] = x.T @ d_shelf[:, None]
    grads["shelf.b"] = np.array([d_shelf.sum()])
    dx = d_vlog @ P["variety.W"].T + d_slog[:, None] @ P["spoil.W"].T + d_shelf[:, None] @ P["shelf.W"].T

    for j in reversed(range(len(cfg.dense_widths))):
        xin, rmask = cache["denses"][j]
        dz = L.relu_backward(dx, rmask)
        grads[f"dense{j}.W"] = xin.T @ dz
        grads[f"dense{j}.b"] = dz.sum(axis=0)
        dx = dz @ P[f"dense{j}.W"].T

    n_trunk = int(np.prod(cache["trunk_shape"][1:]))
    dh = dx[:, :n_trunk].reshape(cache["trunk_shape"])
    for i in reversed(range(len(cfg.conv_blocks))):
        cc, rmask, pc = cache["convs"][i]
        da = L.maxpool_backward(dh, pc)
        dz = L.relu_backward(da, rmask)
        dh, grads[f"conv{i}.W"], grads[f"conv{i}.b"] = L.conv2d_backward(dz, P[f"conv{i}.W"], cc)
    return {k: grads[k] for k in P}


def loss_and_grads(model, images, feats, labels):
    out, cache = forward(model, images, feats, keep_cache=True)
    return losses(model, out, labels), backward(model, out, cache, labels)
