import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeradar.evaluation import (
    RunStats,
    accuracy,
    confusion,
    latency_curve,
    macro_f1,
    read_metrics,
    repeat_runs,
    write_confusion,
    write_latency_curve,
    write_metrics,
)
from spikeradar.models import ModelSpec, TrainConfig, build_model, train
from spikeradar.radar_dsp import RdSequence
from spikeradar.snn_engine import predict_from_prefix
from test_models import TINY, tiny_dataset, tiny_spec


def brute_force_macro_f1(cm: np.ndarray) -> float:
    """Per-class F1 from first principles, averaged with equal weight."""
    m = cm.shape[0]
    total = 0.0
    for i in range(m):
        tp = cm[i, i]
        fp = sum(cm[r, i] for r in range(m)) - tp
        fn = sum(cm[i, c] for c in range(m)) - tp
        denom = 2 * tp + fp + fn
        total += (2 * tp / denom) if denom > 0 else 0.0
    return total / m


class TestMacroF1:
    def test_perfect_diagonal_is_one(self):
        cm = np.diag([5, 3, 7])
        assert macro_f1(cm) == 1.0

    def test_two_class_worked_example(self):
        # TP=1, FP=1, FN=1 per class: F1 = (1/2)(2/4 + 2/4) = 0.5
        cm = np.array([[1, 1], [1, 1]])
        assert macro_f1(cm) == pytest.approx(0.5)

    def test_matches_brute_force_on_random_matrices(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            m = int(rng.integers(2, 7))
            cm = rng.integers(0, 20, (m, m))
            assert macro_f1(cm) == pytest.approx(brute_force_macro_f1(cm))

    def test_empty_class_contributes_zero(self):
        cm = np.array([[4, 0, 0], [0, 5, 0], [0, 0, 0]])
        assert macro_f1(cm) == pytest.approx(2 / 3)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_bounds_and_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 6))
        cm = rng.integers(0, 15, (m, m))
        score = macro_f1(cm)
        assert 0.0 <= score <= 1.0
        perm = rng.permutation(m)
        permuted = cm[np.ix_(perm, perm)]
        assert macro_f1(permuted) == pytest.approx(score)
        if score == 1.0:
            off_diag = cm - np.diag(np.diag(cm))
            assert off_diag.sum() == 0 and np.all(np.diag(cm).sum() > 0)


class TestAccuracy:
    def test_diagonal_accuracy_one(self):
        assert accuracy(np.diag([2, 2, 2])) == 1.0

    def test_uniform_random_predictor_near_chance(self):
        rng = np.random.default_rng(1)
        m, n = 4, 10_000
        cm = np.zeros((m, m), dtype=int)
        for _ in range(n):
            cm[rng.integers(m), rng.integers(m)] += 1
        p = 1.0 / m
        assert abs(accuracy(cm) - p) <= 3 * np.sqrt(p * (1 - p) / n)

    def test_permutation_invariant(self):
        cm = np.array([[5, 1], [2, 8]])
        perm = cm[np.ix_([1, 0], [1, 0])]
        assert accuracy(perm) == accuracy(cm)

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            accuracy(np.zeros((3, 3), dtype=int))


class TestConfusion:
    def test_counts_match_direct_tally(self):
        data = tiny_dataset(n_per_class=5)
        model = build_model(tiny_spec("gru"), np.random.default_rng(0))
        cm = confusion(model, data)
        assert cm.sum() == len(data)
        hits = sum(1 for s in data if model.predict(s.maps)[0] == s.label)
        assert np.trace(cm) == hits

    def test_empty_dataset_rejected(self):
        model = build_model(tiny_spec("gru"), np.random.default_rng(0))
        with pytest.raises(ValueError):
            confusion(model, [])


class TestLatencyCurve:
    def test_requires_snn(self):
        model = build_model(tiny_spec("lstm"), np.random.default_rng(0))
        with pytest.raises(ValueError, match="full input sequence"):
            latency_curve(model, tiny_dataset(n_per_class=2))

    def test_covers_all_prefixes_and_final_matches_infer(self):
        model = build_model(tiny_spec("snn"), np.random.default_rng(2))
        data = tiny_dataset(n_per_class=4)
        rows = latency_curve(model, data)
        assert [t for t, _ in rows] == [1, 2]
        full_hits = sum(1 for s in data if model.predict(s.maps)[0] == s.label)
        assert rows[-1][1] == pytest.approx(full_hits / len(data))

    def test_matches_predict_from_prefix(self):
        model = build_model(tiny_spec("snn"), np.random.default_rng(3))
        data = tiny_dataset(n_per_class=3)
        rows = latency_curve(model, data)
        for t, acc in rows:
            hits = sum(
                1 for s in data if predict_from_prefix(model, s, t) == s.label
            )
            assert acc == pytest.approx(hits / len(data))


class TestRepeatRuns:
    def test_single_seed_zero_std(self):
        data = tiny_dataset(n_per_class=4)
        cfg = TrainConfig(epochs=1, batch_size=4, seed=0, augment=False)
        stats = repeat_runs(tiny_spec("gru"), data, data, cfg, n_seeds=1)
        assert stats.acc_std == 0.0
        assert stats.f1_std == 0.0
        assert len(stats.accuracies) == 1

    def test_multi_seed_statistics(self):
        data = tiny_dataset(n_per_class=4)
        cfg = TrainConfig(epochs=1, batch_size=4, seed=5, augment=False)
        stats = repeat_runs(tiny_spec("gru"), data, data, cfg, n_seeds=3)
        assert stats.acc_mean == pytest.approx(np.mean(stats.accuracies))
        assert stats.acc_std == pytest.approx(np.std(stats.accuracies))

    def test_rejects_zero_seeds(self):
        with pytest.raises(ValueError):
            repeat_runs(tiny_spec("gru"), tiny_dataset(2), tiny_dataset(2), TrainConfig(), 0)


class TestFileFormats:
    def test_metrics_roundtrip(self, tmp_path):
        path = tmp_path / "metrics.txt"
        write_metrics({"accuracy": 0.9375, "macro_f1": 0.91}, path)
        back = read_metrics(path)
        assert back["accuracy"] == pytest.approx(0.9375)
        assert back["macro_f1"] == pytest.approx(0.91)

    def test_confusion_grid(self, tmp_path):
        path = tmp_path / "cm.txt"
        write_confusion(np.array([[3, 1], [0, 5]]), path)
        assert path.read_text() == "3 1\n0 5\n"

    def test_latency_curve_lines(self, tmp_path):
        path = tmp_path / "curve.txt"
        write_latency_curve([(1, 0.25), (2, 0.5)], path)
        assert path.read_text() == "1,0.250000\n2,0.500000\n"
