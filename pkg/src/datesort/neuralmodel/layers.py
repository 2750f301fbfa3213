"""NHWC layer primitives with explicit backward passes."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(x, w, b):
    """'Same' convolution, stride 1. x: (N,H,W,C), w: (k,k,C,F)."""
    k = w.shape[0]
    p = k // 2
    n, h, wd, c = x.shape
    xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
    # (N,H,W,C,k,k) -> (N,H,W,k,k,C)
    win = sliding_window_view(xp, (k, k), axis=(1, 2)).transpose(0, 1, 2, 4, 5, 3)
    cols = win.reshape(n * h * wd, k * k * c)
    out = cols @ w.reshape(k * k * c, -1) + b
    return out.reshape(n, h, wd, -1), (x.shape, cols)


def conv2d_backward(dout, w, cache):
    (n, h, wd, c), cols = cache
    k = w.shape[0]
    p = k // 2
    f = w.shape[3]
    d2 = dout.reshape(-1, f)
    dw = (cols.T @ d2).reshape(w.shape)
    db = d2.sum(axis=0)
    dcols = (d2 @ w.reshape(k * k * c, f).T).reshape(n, h, wd, k, k, c)
    dxp = np.zeros((n, h + 2 * p, wd + 2 * p, c))
    for i in range(k):
        for j in range(k):
            dxp[:, i:i + h, j:j + wd, :] += dcols[:, :, :, i, j, :]
    return dxp[:, p:p + h, p:p + wd, :], dw, db


def relu_forward(x):
    return np.maximum(x, 0.0), x > 0


def relu_backward(dout, mask):
    return dout * mask


def maxpool_forward(x):
    """2x2 max pool, stride 2; odd trailing rows/columns are dropped."""
    n, h, w, c = x.shape
    h2, w2 = h // 2, w // 2
    xc = x[:, :2 * h2, :2 * w2, :]
    blocks = xc.reshape(n, h2, 2, w2, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, h2, w2, c, 4)
    idx = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
    return out, (x.shape, idx)


def maxpool_backward(dout, cache):
    (n, h, w, c), idx = cache
    h2, w2 = h // 2, w // 2
    onehot = np.zeros((n, h2, w2, c, 4))
    np.put_along_axis(onehot, idx[..., None], dout[..., None], axis=-1)
    dx = np.zeros((n, h, w, c))
    dx[:, :2 * h2, :2 * w2, :] = (onehot.reshape(n, h2, w2, c, 2, 2)
                                  .transpose(0, 1, 4, 2, 5, 3).reshape(n, 2 * h2, 2 * w2, c))
    return dx


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def bce_with_logits(z, y):
    return np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
