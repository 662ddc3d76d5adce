"""Iterative global magnitude pruning with fine-tuning between events.

Connection weights (dense/conv/recurrent matrices) are ranked by absolute
value across all layers at once; biases and LIF decay/threshold vectors are
structural and never pruned. Masked weights stay exactly zero: gradients
are masked before every optimizer step and the weights are re-masked after.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluation import accuracy, confusion
from .models import SequenceClassifier, TrainConfig, checkpoint_bytes
from .models.train import stratified_split
from .augment import augment_sequence
from .nn_core import Adam

PruneMask = dict[str, np.ndarray]


@dataclass(frozen=True)
class PruneSchedule:
    """Cubic sparsity ramp: s_k = s_final + (s_initial - s_final) * (1 - k/n)^3."""

    s_initial: float = 0.0
    s_final: float = 0.8
    n_steps: int = 4
    finetune_iters: int = 30

    def __post_init__(self) -> None:
        if not 0.0 <= self.s_initial <= self.s_final < 1.0:
            raise ValueError("need 0 <= s_initial <= s_final < 1")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.finetune_iters < 0:
            raise ValueError("finetune_iters must be non-negative")


def sparsity_at(schedule: PruneSchedule, k: int) -> float:
    """Target sparsity after pruning event k, for k in [0, n_steps]."""
    if not 0 <= k <= schedule.n_steps:
        raise ValueError(f"event index {k} out of range [0, {schedule.n_steps}]")
    if k == 0:
        return schedule.s_initial
    frac = 1.0 - k / schedule.n_steps
    return schedule.s_final + (schedule.s_initial - schedule.s_final) * frac**3


def apply_magnitude_prune(model: SequenceClassifier, target_sparsity: float) -> PruneMask:
    """Mask the floor(target * n) globally smallest-magnitude weights.

    Ties resolve by parameter order, then flat index (stable sort over the
    concatenated magnitudes).
    """
    if not 0.0 <= target_sparsity < 1.0:
        raise ValueError("target sparsity must be in [0, 1)")
    named = model.prunable_parameters()
    mags = np.concatenate([np.abs(p.values).ravel() for _, p in named])
    n_zero = int(np.floor(target_sparsity * mags.size))
    flat = np.ones(mags.size)
    if n_zero:
        order = np.argsort(mags, kind="stable")
        flat[order[:n_zero]] = 0.0
    masks: PruneMask = {}
    offset = 0
    for name, p in named:
        masks[name] = flat[offset : offset + p.size].reshape(p.shape)
        offset += p.size
    return masks


def mask_sparsity(masks: PruneMask) -> float:
    """Fraction of masked-out weights over the prunable tensors."""
    zeros = sum(int(m.size - np.count_nonzero(m)) for m in masks.values())
    total = sum(m.size for m in masks.values())
    return zeros / total


def _apply_mask(model: SequenceClassifier, masks: PruneMask) -> None:
    for name, p in model.prunable_parameters():
        p.values *= masks[name]


def _mask_grads(model: SequenceClassifier, masks: PruneMask) -> None:
    for name, p in model.prunable_parameters():
        p.grad *= masks[name]


@dataclass
class PruneLevel:
    sparsity_target: float
    sparsity_achieved: float
    accuracy: float
    checkpoint: bytes


def prune_and_finetune(
    model: SequenceClassifier,
    train_data,
    eval_data,
    schedule: PruneSchedule,
    cfg: TrainConfig,
) -> tuple[list[PruneLevel], list[tuple[float, float, float]]]:
    """Run the pruning schedule on a trained model (modified in place).

    Event 0 evaluates the model at the initial sparsity without fine-tuning;
    events 1..n_steps re-mask at the scheduled sparsity, fine-tune for
    `schedule.finetune_iters` masked Adam updates, and evaluate. Returns the
    per-level snapshots and the `(sparsity, accuracy_mean, accuracy_std)`
    curve; std is 0 for this single-run sweep.
    """
    if not train_data:
        raise ValueError("training data is empty")
    labels = [s.label for s in train_data]
    split_seed = cfg.seed if cfg.split_seed is None else cfg.split_seed
    train_idx, _ = stratified_split(labels, cfg.val_fraction, split_seed)
    order_ss, aug_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    order_rng = np.random.default_rng(order_ss)
    aug_rng = np.random.default_rng(aug_ss)
    opt = Adam(model.parameters(), lr=cfg.lr)

    def evaluate() -> float:
        return accuracy(confusion(model, eval_data))

    def finetune(masks: PruneMask) -> None:
        pool: list[int] = []
        for _ in range(schedule.finetune_iters):
            if len(pool) < cfg.batch_size:
                pool.extend(order_rng.permutation(np.array(train_idx)).tolist())
            batch, pool[:] = pool[: cfg.batch_size], pool[cfg.batch_size :]
            opt.zero_grad()
            for i in batch:
                seq = train_data[i]
                if cfg.augment:
                    seq = augment_sequence(seq, cfg.augment_params, aug_rng)
                model.loss_and_backward(seq.maps, seq.label)
            _mask_grads(model, masks)
            for p in model.parameters():
                p.grad *= 1.0 / len(batch)
            opt.step()
            model.clamp_dynamics()
            _apply_mask(model, masks)

    levels: list[PruneLevel] = []
    for k in range(schedule.n_steps + 1):
        target = sparsity_at(schedule, k)
        masks = apply_magnitude_prune(model, target)
        _apply_mask(model, masks)
        if k > 0:
            finetune(masks)
        levels.append(
            PruneLevel(
                sparsity_target=target,
                sparsity_achieved=mask_sparsity(masks),
                accuracy=evaluate(),
                checkpoint=checkpoint_bytes(model),
            )
        )
    curve = [(lv.sparsity_achieved, lv.accuracy, 0.0) for lv in levels]
    return levels, curve


def write_prune_curve(rows, path) -> None:
    """Emit `sparsity,accuracy_mean,accuracy_std` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for sparsity, mean, std in rows:
            fh.write(f"{sparsity:.6f},{mean:.6f},{std:.6f}\n")
