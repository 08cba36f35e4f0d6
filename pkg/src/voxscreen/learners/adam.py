"""Bias-corrected Adam over a dict of named parameter arrays."""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteGradientError, ShapeMismatchError


class Adam:
    """theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), the usual recipe."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray],
             grads: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """One update; returns new parameters, accumulators advance in place."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        out = {}
        for name, theta in params.items():
            g = grads[name]
            if g.shape != theta.shape:
                raise ShapeMismatchError(
                    f"{name}: gradient {g.shape} vs parameter {theta.shape}")
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradientError(f"non-finite gradient in {name}")
            m = self.m.get(name)
            if m is None:
                m = np.zeros_like(theta)
                self.v[name] = np.zeros_like(theta)
            v = self.v[name]
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * g * g
            self.m[name], self.v[name] = m, v
            out[name] = theta - self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        return out
