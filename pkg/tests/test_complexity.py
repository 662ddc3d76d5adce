import numpy as np
import pytest

from spikeradar.complexity import (
    ComplexityReport,
    memory_report,
    DenseOpCounter,
    EffectiveOpCounter,
    count_eflops,
    count_flops,
    eflops_stats,
    input_mb,
    params_mb,
    profile_model,
    write_report,
)
from spikeradar.models import ModelSpec, build_model
from spikeradar.nn_core import Conv2d, Dense
from spikeradar.snn_engine import LifLayer, lif_step
from test_models import tiny_maps, tiny_spec


def naive_matmul_eflops(x: np.ndarray, w: np.ndarray) -> float:
    """Reference count: accumulate nonzero products, accumulator seeded by bias.

    One multiplication and one addition per (input, weight) pair where both
    operands are nonzero; zero products are skipped entirely.
    """
    count = 0
    for i in range(x.shape[0]):
        for j in range(w.shape[1]):
            for l in range(x.shape[1]):
                if x[i, l] != 0.0 and w[l, j] != 0.0:
                    count += 2
    return float(count)


def naive_lif_step_eflops(beta, u, current, theta, spikes, u_pre) -> float:
    count = 0
    for i in range(len(u)):
        if beta[i] != 0.0 and u[i] != 0.0:
            count += 1  # decay multiply
        if beta[i] * u[i] != 0.0 or current[i] != 0.0:
            count += 1  # integrate add
        if spikes[i] != 0.0 and theta[i] != 0.0:
            count += 1  # reset scale multiply
        if u_pre[i] != 0.0 or spikes[i] * theta[i] != 0.0:
            count += 1  # reset subtract
    return float(count)


class TestDenseCounting:
    def test_dense_512_to_128_is_131072(self):
        layer = Dense(512, 128, np.random.default_rng(0))
        counter = DenseOpCounter()
        layer.forward(np.ones(512), counter=counter)
        assert counter.total == 2 * 512 * 128 == 131072

    def test_conv_flops_linear_in_channels(self):
        counts = []
        for c_out in (4, 8):
            layer = Conv2d(2, c_out, 3, np.random.default_rng(0))
            counter = DenseOpCounter()
            layer.forward(np.ones((1, 8, 8, 2)), counter=counter)
            counts.append(counter.total)
        assert counts[1] == 2 * counts[0]

    def test_full_hybrid_model_order_of_magnitude(self):
        flops = count_flops(ModelSpec(kind="snn"))
        assert 1e8 <= flops < 1e9

    def test_count_is_deterministic(self):
        spec = ModelSpec(kind="lstm")
        assert count_flops(spec) == count_flops(spec)


class TestEffectiveCounting:
    def test_fully_dense_equals_dense_count(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(1.0, 2.0, (3, 10))
        w = rng.uniform(1.0, 2.0, (10, 7))
        eff, dense = EffectiveOpCounter(), DenseOpCounter()
        eff.matmul(x, w)
        dense.matmul(x, w)
        assert eff.total == dense.total

    def test_all_zero_weights_count_nothing(self):
        eff = EffectiveOpCounter()
        eff.matmul(np.ones((4, 6)), np.zeros((6, 3)))
        assert eff.total == 0.0

    def test_half_pruned_dense_counts_half(self):
        rng = np.random.default_rng(2)
        w = rng.uniform(1.0, 2.0, (8, 8))
        w[::2, :] = 0.0  # exactly half the weights
        eff = EffectiveOpCounter()
        eff.matmul(np.ones((5, 8)), w)
        assert eff.total == 0.5 * 2 * 5 * 8 * 8

    def test_matmul_matches_naive_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            x = rng.normal(size=(rng.integers(1, 16), rng.integers(1, 16)))
            w = rng.normal(size=(x.shape[1], rng.integers(1, 16)))
            x[rng.random(x.shape) < 0.4] = 0.0
            w[rng.random(w.shape) < 0.4] = 0.0
            eff = EffectiveOpCounter()
            eff.matmul(x, w)
            assert eff.total == naive_matmul_eflops(x, w)

    def test_lif_step_matches_naive_oracle(self):
        rng = np.random.default_rng(4)
        layer = LifLayer(4, 6, rng)
        layer.reset_state()
        layer.u[...] = np.where(rng.random(6) < 0.3, 0.0, rng.normal(size=6))
        layer.beta.values[...] = np.where(rng.random(6) < 0.3, 0.0, 0.8)
        u_before = layer.u.copy()
        current = np.where(rng.random(6) < 0.4, 0.0, rng.normal(size=6) * 2)
        counter = EffectiveOpCounter()
        spikes = lif_step(layer, current, counter=counter)
        u_pre = layer.beta.values * u_before + current
        expected = naive_lif_step_eflops(
            layer.beta.values, u_before, current, layer.theta.values, spikes, u_pre
        )
        assert counter.total == expected

    def test_conv2d_effective_excludes_padding_zeros(self):
        layer = Conv2d(1, 2, 3, np.random.default_rng(5))
        layer.w.values[...] = 1.0
        x = np.ones((1, 4, 4, 1))
        eff, dense = EffectiveOpCounter(), DenseOpCounter()
        layer.forward(x, counter=dense)
        layer._cache = None
        layer.forward(x, counter=eff)
        assert eff.total < dense.total  # zero padding never multiplies


class TestModelLevel:
    def test_eflops_le_flops_on_random_inputs(self):
        spec = tiny_spec("snn")
        model = build_model(spec, np.random.default_rng(0))
        flops = count_flops(spec)
        rng = np.random.default_rng(1)
        for _ in range(5):
            maps = rng.random((2, 16, 16))
            assert count_eflops(model, maps) <= flops

    def test_eflops_drop_when_weights_pruned(self):
        spec = tiny_spec("gru")
        model = build_model(spec, np.random.default_rng(0))
        maps = tiny_maps(3)
        before = count_eflops(model, maps)
        for _, p in model.prunable_parameters():
            flat = p.values.ravel()
            flat[:: 2] = 0.0
        after = count_eflops(model, maps)
        assert after < before

    def test_eflops_stats_mean_std(self):
        model = build_model(tiny_spec("snn"), np.random.default_rng(0))
        seqs = [tiny_maps(i) for i in range(4)]
        mean, std = eflops_stats(model, seqs)
        vals = [count_eflops(model, s) for s in seqs]
        assert mean == pytest.approx(np.mean(vals))
        assert std == pytest.approx(np.std(vals))

    def test_eflops_deterministic(self):
        model = build_model(tiny_spec("snn"), np.random.default_rng(0))
        maps = tiny_maps(7)
        assert count_eflops(model, maps) == count_eflops(model, maps)


class TestMemory:
    def test_single_frame_input_mb(self):
        assert input_mb(128, 1) == pytest.approx(0.0625)

    def test_sequence_input_mb(self):
        assert input_mb(128, 15) == pytest.approx(0.9375)

    def test_snn_params_mb_closed_form(self):
        model = build_model(ModelSpec(kind="snn", n_classes=4), np.random.default_rng(0))
        n = model.n_parameters()
        assert params_mb(model) == pytest.approx(4.0 * n / 2**20)

    def test_report_lines(self, tmp_path):
        report = ComplexityReport(
            flops_per_frame=1.2e8,
            eflops_mean=9.1e7,
            eflops_std=1e5,
            params_mb=3.0,
            input_mb=0.0625,
            n_inputs=10,
        )
        path = tmp_path / "report.txt"
        write_report(report, path)
        text = path.read_text()
        assert "flops_per_frame=120000000" in text
        assert "input_mb=0.062500" in text

    def test_memory_report_keys(self):
        model = build_model(ModelSpec(kind="snn"), np.random.default_rng(0))
        report = memory_report(model)
        assert report["input_frame_mb"] == pytest.approx(0.0625)
        assert report["input_sequence_mb"] == pytest.approx(0.9375)
        assert report["params_mb"] == pytest.approx(4.0 * model.n_parameters() / 2**20)

    def test_profile_model_smoke(self):
        model = build_model(tiny_spec("snn"), np.random.default_rng(0))
        report = profile_model(model, [tiny_maps(0), tiny_maps(1)])
        assert report.eflops_mean <= report.flops_per_frame
        assert report.params_mb > 0
