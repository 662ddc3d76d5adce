"""Classification loss."""

from __future__ import annotations

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_ce(logits: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    """Cross-entropy of a single logit vector against an integer label.

    Returns (loss, gradient wrt logits); the gradient is softmax minus the
    one-hot target and therefore sums to zero.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1:
        raise ValueError(f"softmax_ce expects a logit vector, got shape {logits.shape}")
    if not 0 <= target < logits.shape[0]:
        raise ValueError(f"target {target} out of range for {logits.shape[0]} classes")
    if not np.all(np.isfinite(logits)):
        raise ValueError("softmax_ce requires finite logits")
    z = logits - logits.max()
    log_norm = np.log(np.exp(z).sum())
    loss = float(log_norm - z[target])
    grad = softmax(logits)
    grad[target] -= 1.0
    return loss, grad
