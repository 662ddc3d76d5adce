import numpy as np
import pytest

from gradcheck import check_param_grads, max_rel_error, numerical_grad
from spikeradar.models.recurrent import GRUCell, LSTMCell
from spikeradar.nn_core.compute import precision


@pytest.fixture(autouse=True)
def f64_compute():
    with precision(np.float64):
        yield


def seq_loss(cell, xs, weight):
    def run():
        hs = cell.forward_sequence(xs)
        loss = float((hs * weight).sum())
        cell.backward_sequence(weight)
        return loss

    return run


@pytest.mark.parametrize("cell_cls", [LSTMCell, GRUCell])
class TestCells:
    def test_output_shape_and_determinism(self, cell_cls):
        rng = np.random.default_rng(0)
        cell = cell_cls(6, 5, rng)
        xs = np.random.default_rng(1).normal(size=(7, 6))
        a = cell.forward_sequence(xs)
        cell._trace = None
        b = cell.forward_sequence(xs)
        cell._trace = None
        assert a.shape == (7, 5)
        np.testing.assert_array_equal(a, b)

    def test_constant_input_steady_progression(self, cell_cls):
        # identical inputs at every step: permuting the (equal) steps changes nothing
        rng = np.random.default_rng(2)
        cell = cell_cls(4, 3, rng)
        x = np.random.default_rng(3).normal(size=4)
        xs = np.tile(x, (6, 1))
        hs = cell.forward_sequence(xs)
        cell._trace = None
        hs2 = cell.forward_sequence(xs[::-1].copy())
        cell._trace = None
        np.testing.assert_allclose(hs, hs2, atol=1e-12)

    def test_param_grads_match_finite_differences(self, cell_cls):
        for i in range(5):
            rng = np.random.default_rng(100 + i)
            cell = cell_cls(4, 3, rng)
            xs = rng.normal(size=(5, 4))
            weight = rng.normal(size=(5, 3))
            worst = check_param_grads(seq_loss(cell, xs, weight), cell.params())
            assert worst < 1e-3, f"{cell_cls.__name__} instance {i}: {worst}"

    def test_input_grads_match_finite_differences(self, cell_cls):
        rng = np.random.default_rng(7)
        cell = cell_cls(3, 4, rng)
        xs = rng.normal(size=(4, 3))
        weight = rng.normal(size=(4, 4))
        cell.forward_sequence(xs)
        gx = cell.backward_sequence(weight)

        def loss():
            hs = cell.forward_sequence(xs)
            cell._trace = None
            return float((hs * weight).sum())

        num = numerical_grad(loss, xs)
        assert max_rel_error(gx, num) < 1e-3

    def test_backward_before_forward_raises(self, cell_cls):
        cell = cell_cls(3, 3, np.random.default_rng(0))
        with pytest.raises(RuntimeError):
            cell.backward_sequence(np.zeros((2, 3)))

    def test_last_step_gradient_only(self, cell_cls):
        # classification-from-last-state wiring: upstream grad only at t = T-1
        rng = np.random.default_rng(9)
        cell = cell_cls(3, 3, rng)
        xs = rng.normal(size=(4, 3))
        weight = np.zeros((4, 3))
        weight[-1] = rng.normal(size=3)
        worst = check_param_grads(seq_loss(cell, xs, weight), cell.params())
        assert worst < 1e-3
