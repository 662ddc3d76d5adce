"""End-to-end training: stratified split, per-batch augmentation, Adam."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..augment import AugmentParams, augment_sequence
from ..nn_core import Adam
from ..radar_dsp import RdSequence
from .network import ModelSpec, SequenceClassifier, build_model


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    lr: float = 1e-3
    seed: int = 0
    augment: bool = True
    val_fraction: float = 0.1
    split_seed: int | None = None  # defaults to `seed`; fix it to share a split
    augment_params: AugmentParams = field(default_factory=AugmentParams)
    early_stop_acc: float | None = None  # stop once validation reaches this

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass
class TrainHistory:
    train_loss: list[float]
    val_accuracy: list[float]
    best_epoch: int
    best_val_accuracy: float


def stratified_split(
    labels: list[int], val_fraction: float, seed: int
) -> tuple[list[int], list[int]]:
    """Per-class shuffled split into (train indices, validation indices)."""
    rng = np.random.default_rng(seed)
    by_class: dict[int, list[int]] = {}
    for i, y in enumerate(labels):
        by_class.setdefault(y, []).append(i)
    train_idx: list[int] = []
    val_idx: list[int] = []
    for y in sorted(by_class):
        idx = np.array(by_class[y])
        rng.shuffle(idx)
        n_val = max(1, int(round(val_fraction * len(idx)))) if len(idx) > 1 else 0
        val_idx.extend(idx[:n_val].tolist())
        train_idx.extend(idx[n_val:].tolist())
    return sorted(train_idx), sorted(val_idx)


def _validation_accuracy(model: SequenceClassifier, data, idx) -> float:
    hits = sum(1 for i in idx if model.predict(data[i].maps)[0] == data[i].label)
    return hits / len(idx)


def train(
    spec: ModelSpec,
    dataset: list[RdSequence],
    cfg: TrainConfig,
) -> tuple[SequenceClassifier, TrainHistory]:
    """Train a model on RD-map sequences; returns the best-validation model.

    Deterministic given cfg.seed: initialization, batch order, and
    augmentation draw from independent child streams of the same seed.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    labels = [s.label for s in dataset]
    if max(labels) >= spec.n_classes or min(labels) < 0:
        raise ValueError("dataset labels exceed the model's class count")

    split_seed = cfg.seed if cfg.split_seed is None else cfg.split_seed
    train_idx, val_idx = stratified_split(labels, cfg.val_fraction, split_seed)
    if not train_idx or not val_idx:
        raise ValueError("dataset too small to split into train and validation")

    init_ss, order_ss, aug_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    model = build_model(spec, np.random.default_rng(init_ss))
    order_rng = np.random.default_rng(order_ss)
    aug_rng = np.random.default_rng(aug_ss)
    opt = Adam(model.parameters(), lr=cfg.lr)

    losses: list[float] = []
    val_accs: list[float] = []
    best_acc = -1.0
    best_epoch = -1
    best_state: list[np.ndarray] | None = None
    for epoch in range(cfg.epochs):
        order = order_rng.permutation(np.array(train_idx))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            opt.zero_grad()
            for i in batch:
                seq = dataset[i]
                if cfg.augment:
                    seq = augment_sequence(seq, cfg.augment_params, aug_rng)
                epoch_loss += model.loss_and_backward(seq.maps, seq.label)
            scale = 1.0 / len(batch)
            for p in model.parameters():
                p.grad *= scale
            opt.step()
            model.clamp_dynamics()
        losses.append(epoch_loss / len(order))
        acc = _validation_accuracy(model, dataset, val_idx)
        val_accs.append(acc)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_state = model.state_arrays()
        if cfg.early_stop_acc is not None and acc >= cfg.early_stop_acc:
            break

    model.load_state_arrays(best_state)
    history = TrainHistory(
        train_loss=losses,
        val_accuracy=val_accs,
        best_epoch=best_epoch,
        best_val_accuracy=best_acc,
    )
    return model, history


def infer(model: SequenceClassifier, seq: RdSequence) -> tuple[int, np.ndarray]:
    """Predicted label and class scores for one sequence."""
    return model.predict(seq.maps)
