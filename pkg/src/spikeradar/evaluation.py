"""Metrics, multi-seed aggregation, and the prefix latency-accuracy curve."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .models import ModelSpec, SequenceClassifier, TrainConfig, train
from .radar_dsp import RdSequence


def confusion(model: SequenceClassifier, data) -> np.ndarray:
    """Confusion matrix over a dataset: rows true class, columns predicted."""
    if not len(data):
        raise ValueError("cannot evaluate an empty dataset")
    m = model.spec.n_classes
    cm = np.zeros((m, m), dtype=np.int64)
    for seq in data:
        pred, _ = model.predict(seq.maps)
        cm[seq.label, pred] += 1
    return cm


def accuracy(cm: np.ndarray) -> float:
    total = int(cm.sum())
    if total == 0:
        raise ValueError("confusion matrix is empty")
    return float(np.trace(cm)) / total


def macro_f1(cm: np.ndarray) -> float:
    """Macro-averaged F1: mean over classes of 2TP / (2TP + FP + FN).

    A class with no true or predicted samples has an undefined F1 and
    contributes 0 to the average.
    """
    cm = np.asarray(cm)
    m = cm.shape[0]
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    scores = np.divide(2 * tp, denom, out=np.zeros(m), where=denom > 0)
    return float(scores.mean())


@dataclass
class RunStats:
    accuracies: list[float]
    f1_scores: list[float]
    acc_mean: float
    acc_std: float
    f1_mean: float
    f1_std: float


def repeat_runs(
    spec: ModelSpec,
    train_data,
    test_data,
    cfg: TrainConfig,
    n_seeds: int = 10,
) -> RunStats:
    """Train and evaluate with n_seeds different seeds on a fixed split.

    Seed s uses cfg.seed + s for init/shuffle/augmentation while the
    train/validation split stays pinned to the base configuration. Std is
    the population value and is 0 for a single seed.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    split_seed = cfg.seed if cfg.split_seed is None else cfg.split_seed
    accs: list[float] = []
    f1s: list[float] = []
    for s in range(n_seeds):
        run_cfg = replace(cfg, seed=cfg.seed + s, split_seed=split_seed)
        model, _ = train(spec, train_data, run_cfg)
        cm = confusion(model, test_data)
        accs.append(accuracy(cm))
        f1s.append(macro_f1(cm))
    return RunStats(
        accuracies=accs,
        f1_scores=f1s,
        acc_mean=float(np.mean(accs)),
        acc_std=float(np.std(accs)),
        f1_mean=float(np.mean(f1s)),
        f1_std=float(np.std(f1s)),
    )


def latency_curve(model: SequenceClassifier, data) -> list[tuple[int, float]]:
    """Accuracy from cumulative output spike counts at every prefix length.

    Only the spiking head can classify from a partial sequence; other heads
    raise. The t = seq_len point equals full-sequence inference exactly.
    """
    if model.spec.kind != "snn":
        raise ValueError(
            f"latency curve needs a spiking model, got {model.spec.kind!r} "
            "(other heads require the full input sequence)"
        )
    if not len(data):
        raise ValueError("cannot evaluate an empty dataset")
    t_len = data[0].maps.shape[0]
    hits = np.zeros(t_len, dtype=np.int64)
    for seq in data:
        counts = model.spike_train(seq.maps).cumsum(axis=0)  # [T, M]
        preds = counts.argmax(axis=1)
        hits += preds == seq.label
    return [(t + 1, float(hits[t]) / len(data)) for t in range(t_len)]


def write_metrics(metrics: dict[str, float], path) -> None:
    """Write `key=value` lines with fixed six-decimal formatting."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in metrics.items():
            fh.write(f"{key}={value:.6f}\n")


def read_metrics(path) -> dict[str, float]:
    out: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            out[key] = float(value)
    return out


def write_confusion(cm: np.ndarray, path) -> None:
    """Write the confusion matrix as an M-line integer grid."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.asarray(cm, dtype=np.int64):
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def write_latency_curve(rows, path) -> None:
    """Emit `t,accuracy` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for t, acc in rows:
            fh.write(f"{t},{acc:.6f}\n")
