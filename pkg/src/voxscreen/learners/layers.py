"""Differentiable building blocks, each a forward/backward pair.

Shapes follow channels-last convention: images are [n, h, w, c],
dense inputs [n, d]. Backward functions take the upstream gradient and
return gradients for inputs and parameters in declaration order.
"""

from __future__ import annotations

import numpy as np

GELU_C = np.sqrt(2.0 / np.pi)


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_grad(y):
    """Derivative expressed through the forward output y."""
    return y * (1.0 - y)


def relu(x):
    return np.maximum(x, 0.0)


def relu_grad(x):
    return (x > 0.0).astype(np.float64)


def gelu(x):
    """Tanh-form GELU: 0.5 x (1 + tanh(c (x + 0.044715 x^3)))."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * x * (1.0 + np.tanh(GELU_C * (x + 0.044715 * x ** 3)))


def gelu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    inner = GELU_C * (x + 0.044715 * x ** 3)
    t = np.tanh(inner)
    d_inner = GELU_C * (1.0 + 3.0 * 0.044715 * x ** 2)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t ** 2) * d_inner


def softmax(x, axis=-1):
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


# --- dense ---

def dense_forward(x, w, b):
    return x @ w + b


def dense_backward(x, w, grad_out):
    grad_x = grad_out @ w.T
    grad_w = x.T @ grad_out
    grad_b = grad_out.sum(axis=0)
    return grad_x, grad_w, grad_b


# --- 2-D convolution, stride 1, valid padding ---

def conv2d_forward(x, w, b):
    """x: [n, h, w, c_in]; w: [kh, kw, c_in, c_out]. Returns (out, cols).

    cols keep the window's native (c_in, kh, kw) layout so the big
    gather stays a plain C-order copy; only the small weight tensor is
    transposed to match.
    """
    kh, kw, c_in, c_out = w.shape
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    cols = windows.reshape(*windows.shape[:3], c_in * kh * kw)
    wmat = w.transpose(2, 0, 1, 3).reshape(c_in * kh * kw, c_out)
    out = cols @ wmat + b
    return out, cols


def conv2d_backward(x_shape, w, cols, grad_out, need_grad_x=True):
    kh, kw, c_in, c_out = w.shape
    n, h_out, w_out, _ = grad_out.shape
    flat_cols = cols.reshape(-1, c_in * kh * kw)
    flat_grad = grad_out.reshape(-1, c_out)
    grad_w = (flat_cols.T @ flat_grad).reshape(c_in, kh, kw, c_out).transpose(1, 2, 0, 3)
    grad_b = flat_grad.sum(axis=0)
    if not need_grad_x:
        return None, grad_w, grad_b
    wmat = w.transpose(2, 0, 1, 3).reshape(c_in * kh * kw, c_out)
    grad_cols = (flat_grad @ wmat.T).reshape(n, h_out, w_out, c_in, kh, kw)
    grad_x = np.zeros(x_shape, dtype=grad_out.dtype)
    for i in range(kh):
        for j in range(kw):
            grad_x[:, i:i + h_out, j:j + w_out, :] += grad_cols[:, :, :, :, i, j]
    return grad_x, grad_w, grad_b


# --- 2x2 max pooling, stride 2 ---

def maxpool2_forward(x):
    """Crops odd trailing rows/cols, pools 2x2 blocks. Returns (out, cache).

    The cache holds the winning quadrant (0..3, first max wins ties) per
    output cell.
    """
    n, h, w, c = x.shape
    h2, w2 = h // 2, w // 2
    quads = np.stack([x[:, : h2 * 2: 2, : w2 * 2: 2, :],
                      x[:, : h2 * 2: 2, 1: w2 * 2: 2, :],
                      x[:, 1: h2 * 2: 2, : w2 * 2: 2, :],
                      x[:, 1: h2 * 2: 2, 1: w2 * 2: 2, :]])
    idx = quads.argmax(axis=0)
    out = np.take_along_axis(quads, idx[None], axis=0)[0]
    return out, (x.shape, idx)


def maxpool2_backward(cache, grad_out):
    (n, h, w, c), idx = cache
    h2, w2 = h // 2, w // 2
    grad_x = np.zeros((n, h, w, c), dtype=grad_out.dtype)
    views = (grad_x[:, : h2 * 2: 2, : w2 * 2: 2, :],
             grad_x[:, : h2 * 2: 2, 1: w2 * 2: 2, :],
             grad_x[:, 1: h2 * 2: 2, : w2 * 2: 2, :],
             grad_x[:, 1: h2 * 2: 2, 1: w2 * 2: 2, :])
    for q, view in enumerate(views):
        view += np.where(idx == q, grad_out, 0.0)
    return grad_x


# --- inverted dropout ---

def dropout_forward(x, rate, rng, training):
    """Identity at inference; at training, zero with prob rate and scale
    survivors by 1/(1-rate) so the expectation matches the input."""
    if not training or rate == 0.0:
        return x, None
    draws = rng.random(x.shape, dtype=np.float32)
    mask = ((draws >= rate) / np.asarray(1.0 - rate, dtype=x.dtype)).astype(x.dtype)
    return x * mask, mask


def dropout_backward(mask, grad_out):
    return grad_out if mask is None else grad_out * mask


# --- losses (each returns loss value and gradient wrt its first arg) ---

def softmax_cross_entropy(logits, onehot):
    """Mean categorical cross-entropy straight from logits."""
    p = softmax(logits, axis=1)
    n = logits.shape[0]
    loss = -np.sum(onehot * np.log(np.maximum(p, 1e-300))) / n
    return loss, (p - onehot) / n


def mae_loss(pred, target):
    """Mean absolute error; subgradient sign(pred - target)."""
    diff = pred - target
    return np.mean(np.abs(diff)), np.sign(diff) / diff.size


def bce_from_logits(z, y):
    """Mean binary cross-entropy of sigmoid(z) against labels y."""
    # log(1 + e^z) computed stably for both signs
    softplus = np.logaddexp(0.0, z)
    loss = np.mean(softplus - y * z)
    return loss, (sigmoid(z) - y) / z.size
