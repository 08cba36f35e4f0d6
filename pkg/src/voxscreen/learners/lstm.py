"""Bidirectional LSTM classifier with hand-rolled backprop through time.

The two directions read the sequence forwards and backwards; their final
hidden states are summed (a symmetric merge: swapping the direction
weight blocks while reversing the input leaves the output unchanged),
then dropout, a ReLU dense layer and a sigmoid unit produce the score.
Default training loss is mean absolute error; cross-entropy is opt-in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptySequenceError, NonFiniteLossError, SingleClassDataError
from .adam import Adam
from .layers import (
    bce_from_logits,
    dense_backward,
    dense_forward,
    dropout_backward,
    dropout_forward,
    mae_loss,
    relu,
    relu_grad,
    sigmoid,
)

LSTM_EPOCHS = 100
LSTM_BATCH = 32


@dataclass(frozen=True)
class LstmConfig:
    hidden: int = 64
    dense: int = 32
    dropout: float = 0.3
    lr: float = 1e-3
    loss: str = "mae"  # or "bce"


@dataclass
class LstmModel:
    params: dict[str, np.ndarray]
    config: LstmConfig
    input_dim: int

    def scores(self, sequences: np.ndarray) -> np.ndarray:
        p, _ = lstm_forward(self.params, np.asarray(sequences, dtype=np.float64),
                            self.config, training=False, rng=None)
        return p


def init_lstm_params(input_dim: int, cfg: LstmConfig, rng) -> dict[str, np.ndarray]:
    """Glorot for every weight block; forget-gate bias starts at 1."""
    h = cfg.hidden

    def glorot(shape):
        limit = np.sqrt(6.0 / sum(shape))
        return rng.uniform(-limit, limit, size=shape)

    params = {}
    for d in ("f", "b"):
        params[f"wx_{d}"] = glorot((input_dim, 4 * h))
        params[f"wh_{d}"] = glorot((h, 4 * h))
        bias = np.zeros(4 * h)
        bias[h: 2 * h] = 1.0
        params[f"b_{d}"] = bias
    params["w1"] = glorot((h, cfg.dense))
    params["b1"] = np.zeros(cfg.dense)
    params["w2"] = glorot((cfg.dense, 1))
    params["b2"] = np.zeros(1)
    return params


def _run_direction(xs, wx, wh, b, hidden):
    """One direction over xs [n, T, D]; returns final h and step caches."""
    n, T, _ = xs.shape
    h = np.zeros((n, hidden))
    c = np.zeros((n, hidden))
    caches = []
    for t in range(T):
        x_t = xs[:, t, :]
        z = x_t @ wx + h @ wh + b
        zi, zf, zg, zo = np.split(z, 4, axis=1)
        i, f, o = sigmoid(zi), sigmoid(zf), sigmoid(zo)
        g = np.tanh(zg)
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        caches.append((x_t, h, c, i, f, g, o, tc))
        h, c = h_new, c_new
    return h, caches


def _direction_backward(caches, wx, wh, dh_last, hidden):
    """BPTT for one direction given the gradient at its final h."""
    gw_x = np.zeros_like(wx)
    gw_h = np.zeros_like(wh)
    gb = np.zeros(4 * hidden)
    dh = dh_last
    dc = np.zeros_like(dh_last)
    for x_t, h_prev, c_prev, i, f, g, o, tc in reversed(caches):
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        gw_x += x_t.T @ dz
        gw_h += h_prev.T @ dz
        gb += dz.sum(axis=0)
        dh = dz @ wh.T
    return gw_x, gw_h, gb


def lstm_forward(params, xs, cfg: LstmConfig, training: bool, rng):
    """Scores in (0, 1) for xs [n, T, D], plus the backward cache."""
    h = cfg.hidden
    hf, caches_f = _run_direction(xs, params["wx_f"], params["wh_f"], params["b_f"], h)
    hb, caches_b = _run_direction(xs[:, ::-1, :], params["wx_b"], params["wh_b"],
                                  params["b_b"], h)
    merged = hf + hb
    dropped, mask = dropout_forward(merged, cfg.dropout, rng, training)
    a1 = dense_forward(dropped, params["w1"], params["b1"])
    r1 = relu(a1)
    z2 = dense_forward(r1, params["w2"], params["b2"])
    p = sigmoid(z2[:, 0])
    cache = (caches_f, caches_b, mask, dropped, a1, r1, z2)
    return p, cache


def lstm_backward(params, cache, dz2, cfg: LstmConfig):
    caches_f, caches_b, mask, dropped, a1, r1, z2 = cache
    grads = {}
    dr1, grads["w2"], grads["b2"] = dense_backward(r1, params["w2"], dz2)
    da1 = dr1 * relu_grad(a1)
    ddropped, grads["w1"], grads["b1"] = dense_backward(dropped, params["w1"], da1)
    dmerged = dropout_backward(mask, ddropped)
    grads["wx_f"], grads["wh_f"], grads["b_f"] = _direction_backward(
        caches_f, params["wx_f"], params["wh_f"], dmerged, cfg.hidden)
    grads["wx_b"], grads["wh_b"], grads["b_b"] = _direction_backward(
        caches_b, params["wx_b"], params["wh_b"], dmerged, cfg.hidden)
    return grads


def lstm_loss_grad(params, xs, labels, cfg: LstmConfig, training, rng):
    """Loss and dL/dz2 for one batch (z2 = pre-sigmoid unit)."""
    p, cache = lstm_forward(params, xs, cfg, training, rng)
    if cfg.loss == "mae":
        loss, dp = mae_loss(p, labels)
        dz2 = (dp * p * (1.0 - p))[:, None]
    elif cfg.loss == "bce":
        z2 = cache[-1]
        loss, dz = bce_from_logits(z2[:, 0], labels)
        dz2 = dz[:, None]
    else:
        raise ValueError(f"unknown loss {cfg.loss!r}")
    return loss, cache, dz2


def train_lstm(sequences, labels, epochs: int = LSTM_EPOCHS, batch: int = LSTM_BATCH,
               seed: int = 0, config: LstmConfig = LstmConfig()) -> LstmModel:
    """Fit on sequences [n, T, D] with {0,1} labels; deterministic per seed."""
    xs = np.asarray(sequences, dtype=np.float64)
    if xs.ndim == 2:
        xs = xs[:, :, None]  # scalar sequences
    labels = np.asarray(labels, dtype=np.float64)
    if xs.shape[1] == 0:
        raise EmptySequenceError("sequences have zero timesteps")
    if len(set(labels.tolist())) < 2:
        raise SingleClassDataError("training labels are all identical")

    rng = np.random.default_rng(seed)
    params = init_lstm_params(xs.shape[2], config, rng)
    opt = Adam(lr=config.lr)
    n = len(xs)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            take = order[start:start + batch]
            loss, cache, dz2 = lstm_loss_grad(params, xs[take], labels[take],
                                              config, training=True, rng=rng)
            if not np.isfinite(loss):
                raise NonFiniteLossError(f"loss diverged at step {opt.t}: {loss!r}")
            grads = lstm_backward(params, cache, dz2, config)
            params = opt.step(params, grads)
    return LstmModel(params=params, config=config, input_dim=xs.shape[2])
