"""Small image classifier: two conv/pool/dropout stages, softmax head.

Trained with Adam on categorical cross-entropy over two softmax units,
mini-batches of 32, a fixed epoch budget and no early stopping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteLossError, SingleClassDataError
from .adam import Adam
from .layers import (
    conv2d_backward,
    conv2d_forward,
    dense_backward,
    dense_forward,
    dropout_backward,
    dropout_forward,
    maxpool2_backward,
    maxpool2_forward,
    softmax,
    softmax_cross_entropy,
)

CNN_EPOCHS = 100
CNN_BATCH = 32


@dataclass(frozen=True)
class CnnConfig:
    """Architecture knobs; defaults sized for desk-scale runs."""

    filters1: int = 16
    filters2: int = 32
    kernel: int = 3
    dropout: float = 0.25
    lr: float = 1e-3
    n_classes: int = 2


@dataclass
class CnnModel:
    params: dict[str, np.ndarray]
    config: CnnConfig
    input_shape: tuple[int, int, int]

    def scores(self, images: np.ndarray) -> np.ndarray:
        """Softmax probability of class 1, dropout off."""
        logits, _ = cnn_forward(self.params, images, self.config,
                                training=False, rng=None)
        return softmax(logits, axis=1)[:, 1]


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_cnn_params(input_shape, cfg: CnnConfig, rng) -> dict[str, np.ndarray]:
    h, w, c = input_shape
    k = cfg.kernel
    p = {
        "w1": glorot_uniform(rng, (k, k, c, cfg.filters1),
                             k * k * c, k * k * cfg.filters1),
        "b1": np.zeros(cfg.filters1),
        "w2": glorot_uniform(rng, (k, k, cfg.filters1, cfg.filters2),
                             k * k * cfg.filters1, k * k * cfg.filters2),
        "b2": np.zeros(cfg.filters2),
    }
    h1, w1 = (h - k + 1) // 2, (w - k + 1) // 2
    h2, w2 = (h1 - k + 1) // 2, (w1 - k + 1) // 2
    flat = h2 * w2 * cfg.filters2
    p["wd"] = glorot_uniform(rng, (flat, cfg.n_classes), flat, cfg.n_classes)
    p["bd"] = np.zeros(cfg.n_classes)
    return p


def cnn_forward(params, x, cfg: CnnConfig, training: bool, rng):
    c1, cols1 = conv2d_forward(x, params["w1"], params["b1"])
    p1, pc1 = maxpool2_forward(c1)
    d1, m1 = dropout_forward(p1, cfg.dropout, rng, training)
    c2, cols2 = conv2d_forward(d1, params["w2"], params["b2"])
    p2, pc2 = maxpool2_forward(c2)
    d2, m2 = dropout_forward(p2, cfg.dropout, rng, training)
    flat = d2.reshape(d2.shape[0], -1)
    logits = dense_forward(flat, params["wd"], params["bd"])
    cache = (x, cols1, pc1, m1, d1, cols2, pc2, m2, d2, flat)
    return logits, cache


def cnn_backward(params, cache, grad_logits):
    x, cols1, pc1, m1, d1, cols2, pc2, m2, d2, flat = cache
    grads = {}
    gflat, grads["wd"], grads["bd"] = dense_backward(flat, params["wd"], grad_logits)
    gd2 = gflat.reshape(d2.shape)
    gp2 = dropout_backward(m2, gd2)
    gc2 = maxpool2_backward(pc2, gp2)
    gd1, grads["w2"], grads["b2"] = conv2d_backward(d1.shape, params["w2"], cols2, gc2)
    gp1 = dropout_backward(m1, gd1)
    gc1 = maxpool2_backward(pc1, gp1)
    _, grads["w1"], grads["b1"] = conv2d_backward(x.shape, params["w1"], cols1, gc1,
                                                  need_grad_x=False)
    return grads


def train_cnn(images, labels, epochs: int = CNN_EPOCHS, batch: int = CNN_BATCH,
              seed: int = 0, config: CnnConfig = CnnConfig(),
              dtype=np.float32) -> CnnModel:
    """Fit on [n, h, w, c] images with {0,1} labels.

    Deterministic for fixed (data, seed): shuffling and dropout draw from
    one seeded generator. Training runs in float32 by default; pass
    float64 when the run feeds a gradient check.
    """
    images = np.asarray(images, dtype=dtype)
    labels = np.asarray(labels, dtype=np.int64)
    if images.ndim != 4:
        raise ValueError(f"expected [n, h, w, c] images, got {images.shape}")
    if len(set(labels.tolist())) < 2:
        raise SingleClassDataError("training labels are all identical")

    rng = np.random.default_rng(seed)
    params = init_cnn_params(images.shape[1:], config, rng)
    params = {k: v.astype(dtype) for k, v in params.items()}
    onehot_all = np.eye(config.n_classes, dtype=dtype)[labels]
    opt = Adam(lr=config.lr)

    n = len(images)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            take = order[start:start + batch]
            logits, cache = cnn_forward(params, images[take], config,
                                        training=True, rng=rng)
            loss, grad_logits = softmax_cross_entropy(logits, onehot_all[take])
            if not np.isfinite(loss):
                raise NonFiniteLossError(
                    f"loss diverged at step {opt.t}: {loss!r}")
            grads = cnn_backward(params, cache, grad_logits)
            params = opt.step(params, grads)
    return CnnModel(params={k: v.astype(np.float64) for k, v in params.items()},
                    config=config, input_shape=tuple(images.shape[1:]))
