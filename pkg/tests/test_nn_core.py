import math

import numpy as np
import pytest

from gradcheck import check_param_grads, max_rel_error, numerical_grad
from spikeradar.nn_core import (
    Adam,
    Conv1d,
    Conv2d,
    Dense,
    GlobalAvgPool,
    MaxPool2d,
    ReLU,
    Sigmoid,
    Tanh,
    TemporalMeanPool,
    Tensor,
    softmax_ce,
)
from spikeradar.nn_core.compute import precision


@pytest.fixture(autouse=True)
def f64_compute():
    with precision(np.float64):
        yield


def rng_for(i):
    return np.random.default_rng(1000 + i)


class TestForwardSemantics:
    def test_dense_identity(self):
        layer = Dense(4, 4, rng_for(0))
        layer.w.values[...] = np.eye(4)
        layer.b.values[...] = 0.0
        x = np.array([1.0, -2.0, 3.0, 0.5])
        np.testing.assert_allclose(layer.forward(x), x)

    def test_dense_shape_error(self):
        layer = Dense(4, 3, rng_for(1))
        with pytest.raises(ValueError, match="Dense"):
            layer.forward(np.zeros(5))

    def test_conv1d_unit_impulse_identity(self):
        layer = Conv1d(2, 2, 3, rng_for(2))
        layer.w.values[...] = 0.0
        layer.b.values[...] = 0.0
        for c in range(2):
            layer.w.values[c, c, 1] = 1.0  # center tap
        x = rng_for(3).normal(size=(2, 10))
        np.testing.assert_allclose(layer.forward(x), x, atol=1e-12)

    def test_conv2d_center_tap_identity(self):
        layer = Conv2d(1, 1, 3, rng_for(4))
        layer.w.values[...] = 0.0
        layer.w.values[0, 1, 1, 0] = 1.0
        layer.b.values[...] = 0.0
        x = rng_for(5).normal(size=(2, 6, 6, 1))
        np.testing.assert_allclose(layer.forward(x), x, atol=1e-12)

    def test_relu_zeroes_negatives(self):
        out = ReLU().forward(np.array([-1.0, 0.0, 2.0]))
        np.testing.assert_array_equal(out, [0.0, 0.0, 2.0])

    def test_maxpool_picks_window_max(self):
        x = np.arange(16.0).reshape(1, 4, 4, 1)
        out = MaxPool2d().forward(x)
        np.testing.assert_array_equal(out[0, :, :, 0], [[5, 7], [13, 15]])

    def test_global_avg_pool(self):
        x = np.ones((2, 4, 4, 3)) * np.arange(3)
        out = GlobalAvgPool().forward(x)
        np.testing.assert_allclose(out, np.tile(np.arange(3.0), (2, 1)))

    def test_backward_before_forward_raises(self):
        layer = Dense(3, 3, rng_for(6))
        with pytest.raises(RuntimeError, match="before forward"):
            layer.backward(np.zeros(3))


class TestSoftmaxCE:
    def test_uniform_logits_loss_is_log_m(self):
        for m in (2, 4, 11):
            loss, grad = softmax_ce(np.zeros(m), 0)
            assert loss == pytest.approx(math.log(m), abs=1e-12)
            assert grad.sum() == pytest.approx(0.0, abs=1e-12)

    def test_confident_logit_drives_loss_down(self):
        losses = [softmax_ce(np.array([z, 0.0, 0.0]), 0)[0] for z in (0.0, 2.0, 5.0, 20.0)]
        assert all(a > b for a, b in zip(losses, losses[1:]))
        assert losses[-1] < 1e-8

    def test_loss_nonnegative(self):
        rng = rng_for(7)
        for _ in range(50):
            logits = rng.normal(scale=5.0, size=rng.integers(2, 8))
            loss, _ = softmax_ce(logits, int(rng.integers(len(logits))))
            assert loss >= 0.0

    def test_grad_matches_finite_differences(self):
        rng = rng_for(8)
        logits = rng.normal(size=6)
        target = 2
        _, grad = softmax_ce(logits, target)
        num = numerical_grad(lambda: softmax_ce(logits, target)[0], logits, h=1e-6)
        assert np.max(np.abs(grad - num)) < 1e-6

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            softmax_ce(np.array([np.inf, 0.0]), 0)


def _layer_loss(layer, x, weight):
    """Weighted sum of outputs: a scalar loss exercising all output paths."""

    def run():
        y = layer.forward(x)
        loss = float((y * weight).sum())
        layer.backward(weight * np.ones_like(y) if np.isscalar(weight) else weight)
        return loss

    return run


class TestGradients:
    N_INSTANCES = 6

    def test_dense_grads(self):
        for i in range(self.N_INSTANCES):
            rng = rng_for(i)
            layer = Dense(5, 4, rng)
            x = rng.normal(size=(3, 5))
            weight = rng.normal(size=(3, 4))
            worst = check_param_grads(_layer_loss(layer, x, weight), layer.params())
            assert worst < 1e-3

    def test_dense_input_grads(self):
        rng = rng_for(40)
        layer = Dense(5, 4, rng)
        x = rng.normal(size=(3, 5))
        weight = rng.normal(size=(3, 4))
        layer.forward(x)
        gx = layer.backward(weight)
        num = numerical_grad(lambda: float((layer_forward_fresh(layer, x) * weight).sum()), x)
        assert max_rel_error(gx, num) < 1e-3

    def test_conv1d_grads(self):
        for i in range(self.N_INSTANCES):
            rng = rng_for(100 + i)
            layer = Conv1d(3, 4, 3, rng)
            x = rng.normal(size=(3, 7))
            weight = rng.normal(size=(4, 7))
            worst = check_param_grads(_layer_loss(layer, x, weight), layer.params())
            assert worst < 1e-3

    def test_conv2d_grads(self):
        for i in range(self.N_INSTANCES):
            rng = rng_for(200 + i)
            layer = Conv2d(2, 3, 3, rng)
            x = rng.normal(size=(2, 4, 4, 2))
            weight = rng.normal(size=(2, 4, 4, 3))
            worst = check_param_grads(_layer_loss(layer, x, weight), layer.params())
            assert worst < 1e-3

    def test_conv2d_input_grads(self):
        rng = rng_for(41)
        layer = Conv2d(2, 2, 3, rng)
        x = rng.normal(size=(1, 4, 4, 2))
        weight = rng.normal(size=(1, 4, 4, 2))
        layer.forward(x)
        gx = layer.backward(weight)
        num = numerical_grad(lambda: float((layer_forward_fresh(layer, x) * weight).sum()), x)
        assert max_rel_error(gx, num) < 1e-3

    def test_pool_and_activation_input_grads(self):
        rng = rng_for(42)
        for layer, shape in (
            (MaxPool2d(), (1, 4, 4, 2)),
            (GlobalAvgPool(), (2, 4, 4, 2)),
            (Sigmoid(), (3, 5)),
            (Tanh(), (3, 5)),
            (TemporalMeanPool(), (4, 6)),
        ):
            x = rng.normal(size=shape)
            y = layer.forward(x)
            weight = rng.normal(size=y.shape)
            gx = layer.backward(weight)
            num = numerical_grad(lambda: float((layer_forward_fresh(layer, x) * weight).sum()), x)
            assert max_rel_error(gx, num) < 1e-3, type(layer).__name__

    def test_zero_grad_out_gives_zero_grads(self):
        rng = rng_for(43)
        layer = Dense(4, 3, rng)
        x = rng.normal(size=(2, 4))
        layer.forward(x)
        gx = layer.backward(np.zeros((2, 3)))
        assert np.all(gx == 0.0)
        assert np.all(layer.w.grad == 0.0)
        assert np.all(layer.b.grad == 0.0)

    def test_grad_accumulation_doubles(self):
        rng = rng_for(44)
        layer = Dense(4, 3, rng)
        x = rng.normal(size=(2, 4))
        g = rng.normal(size=(2, 3))
        layer.forward(x)
        layer.backward(g)
        once = layer.w.grad.copy()
        layer.forward(x)
        layer.backward(g)
        np.testing.assert_allclose(layer.w.grad, 2.0 * once, rtol=1e-12)


def layer_forward_fresh(layer, x):
    """Forward pass that leaves no dangling cache (for fd probing)."""
    y = layer.forward(x)
    layer._cache = None
    return y


class TestAdam:
    def test_zero_grads_leave_params_unchanged(self):
        p = Tensor(np.array([1.0, -2.0, 3.0]))
        opt = Adam([p])
        before = p.values.copy()
        opt.zero_grad()
        opt.step()
        np.testing.assert_array_equal(p.values, before)

    def test_constant_gradient_step_approaches_lr(self):
        # with a fixed gradient, bias-corrected Adam steps converge to lr * sign(g)
        p = Tensor(np.zeros(3))
        opt = Adam([p], lr=1e-2)
        g = np.array([0.5, -3.0, 1e-4])
        prev = p.values.copy()
        for _ in range(200):
            p.zero_grad()
            p.grad += g
            opt.step()
        step = prev_step(p, prev, opt)
        np.testing.assert_allclose(np.abs(step), 1e-2, rtol=1e-2)
        np.testing.assert_array_equal(np.sign(step), -np.sign(g))

    def test_parameter_groups_independent(self):
        a = Tensor(np.zeros(2))
        b = Tensor(np.zeros(2))
        opt = Adam([a, b], lr=0.1)
        a.grad += np.ones(2)
        opt.step()
        assert np.all(a.values != 0.0)
        assert np.all(b.values == 0.0)


def prev_step(p, start, opt):
    before = p.values.copy()
    p.zero_grad()
    p.grad += np.array([0.5, -3.0, 1e-4])
    opt.step()
    return p.values - before
