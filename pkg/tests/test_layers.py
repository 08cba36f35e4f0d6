"""Finite-difference verification of every differentiable block."""

import numpy as np
import pytest

from voxscreen.learners.gradcheck import max_relative_error, numeric_grad
from voxscreen.learners.layers import (
    bce_from_logits,
    conv2d_backward,
    conv2d_forward,
    dense_backward,
    dense_forward,
    dropout_backward,
    dropout_forward,
    gelu,
    gelu_grad,
    mae_loss,
    maxpool2_backward,
    maxpool2_forward,
    relu,
    relu_grad,
    sigmoid,
    sigmoid_grad,
    softmax,
    softmax_cross_entropy,
)

TOL = 1e-4
RNG = np.random.default_rng(42)


def assert_grad(analytic, f, x, tol=TOL):
    err = max_relative_error(analytic, numeric_grad(f, x))
    assert err < tol, f"max relative error {err:.3e}"


class TestActivations:
    def test_sigmoid_grad(self):
        x = RNG.normal(size=11)
        assert_grad(sigmoid_grad(sigmoid(x)),
                    lambda v: sigmoid(v).sum(), x)

    def test_sigmoid_extremes_stable(self):
        y = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
        assert np.all(np.isfinite(y))
        assert y[1] == 0.5

    def test_relu_grad(self):
        x = RNG.normal(size=13) + 0.05  # keep away from the kink
        assert_grad(relu_grad(x), lambda v: relu(v).sum(), x)

    def test_gelu_grad(self):
        x = RNG.normal(size=13)
        assert_grad(gelu_grad(x), lambda v: gelu(v).sum(), x)

    def test_gelu_at_zero(self):
        assert gelu(np.array([0.0]))[0] == 0.0

    def test_softmax_rows_sum_to_one(self):
        p = softmax(RNG.normal(size=(6, 4)), axis=1)
        assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)


class TestDense:
    def test_gradients(self):
        x = RNG.normal(size=(4, 5))
        w = RNG.normal(size=(5, 3))
        b = RNG.normal(size=3)
        grad_out = RNG.normal(size=(4, 3))

        def loss(x_, w_, b_):
            return np.sum(dense_forward(x_, w_, b_) * grad_out)

        gx, gw, gb = dense_backward(x, w, grad_out)
        assert_grad(gx, lambda v: loss(v, w, b), x)
        assert_grad(gw, lambda v: loss(x, v, b), w)
        assert_grad(gb, lambda v: loss(x, w, v), b)


class TestConv2d:
    def test_gradients(self):
        x = RNG.normal(size=(2, 6, 7, 3))
        w = RNG.normal(size=(3, 3, 3, 4))
        b = RNG.normal(size=4)
        grad_out = RNG.normal(size=(2, 4, 5, 4))

        def loss(x_, w_, b_):
            return np.sum(conv2d_forward(x_, w_, b_)[0] * grad_out)

        _, cols = conv2d_forward(x, w, b)
        gx, gw, gb = conv2d_backward(x.shape, w, cols, grad_out)
        assert_grad(gx, lambda v: loss(v, w, b), x)
        assert_grad(gw, lambda v: loss(x, v, b), w)
        assert_grad(gb, lambda v: loss(x, w, v), b)

    def test_known_value(self):
        """3x3 all-ones kernel over an index grid = local sum."""
        x = np.arange(16, dtype=np.float64).reshape(1, 4, 4, 1)
        w = np.ones((3, 3, 1, 1))
        out, _ = conv2d_forward(x, w, np.zeros(1))
        assert out[0, 0, 0, 0] == x[0, :3, :3, 0].sum()
        assert out[0, 1, 1, 0] == x[0, 1:4, 1:4, 0].sum()


class TestMaxPool:
    def test_forward_values(self):
        x = np.arange(16, dtype=np.float64).reshape(1, 4, 4, 1)
        out, _ = maxpool2_forward(x)
        assert out[0, :, :, 0].tolist() == [[5, 7], [13, 15]]

    def test_odd_sizes_cropped(self):
        x = RNG.normal(size=(1, 5, 7, 2))
        out, _ = maxpool2_forward(x)
        assert out.shape == (1, 2, 3, 2)

    def test_backward_gradient(self):
        x = RNG.normal(size=(2, 6, 6, 3))  # continuous values: no ties
        grad_out = RNG.normal(size=(2, 3, 3, 3))

        def loss(x_):
            return np.sum(maxpool2_forward(x_)[0] * grad_out)

        _, cache = maxpool2_forward(x)
        gx = maxpool2_backward(cache, grad_out)
        assert_grad(gx, loss, x)


class TestDropout:
    def test_inference_is_identity(self):
        x = RNG.normal(size=(5, 5))
        out, mask = dropout_forward(x, 0.4, None, training=False)
        assert out is x and mask is None

    def test_expected_output_matches_input(self):
        """Inverted scaling keeps the mean within 1% over 1e4 draws."""
        rng = np.random.default_rng(7)
        x = np.ones((100, 100))  # 1e4 elements
        total = np.zeros_like(x)
        n_draws = 40
        for _ in range(n_draws):
            out, _ = dropout_forward(x, 0.25, rng, training=True)
            total += out
        assert abs(total.mean() / n_draws - 1.0) < 0.01

    def test_backward_uses_mask(self):
        rng = np.random.default_rng(8)
        x = RNG.normal(size=(4, 4))
        out, mask = dropout_forward(x, 0.5, rng, training=True)
        grad = dropout_backward(mask, np.ones_like(x))
        assert np.array_equal(grad, mask)


class TestLosses:
    def test_softmax_cross_entropy_grad(self):
        logits = RNG.normal(size=(5, 2))
        onehot = np.eye(2)[RNG.integers(0, 2, 5)]
        loss, grad = softmax_cross_entropy(logits, onehot)
        assert loss > 0
        assert_grad(grad, lambda v: softmax_cross_entropy(v, onehot)[0], logits)

    def test_mae_grad(self):
        pred = RNG.uniform(0.1, 0.9, size=7)
        target = RNG.integers(0, 2, size=7).astype(float)
        loss, grad = mae_loss(pred, target)
        assert_grad(grad, lambda v: mae_loss(v, target)[0], pred)

    def test_bce_grad(self):
        z = RNG.normal(size=9)
        y = RNG.integers(0, 2, size=9).astype(float)
        loss, grad = bce_from_logits(z, y)
        assert loss > 0
        assert_grad(grad, lambda v: bce_from_logits(v, y)[0], z)

    def test_bce_stable_for_large_logits(self):
        loss, grad = bce_from_logits(np.array([500.0, -500.0]),
                                     np.array([1.0, 0.0]))
        assert np.isfinite(loss) and np.all(np.isfinite(grad))
