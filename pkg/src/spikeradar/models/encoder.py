"""Compact convolutional encoder shared by all temporal heads.

Four conv3x3 -> ReLU -> maxpool blocks, global average pooling, and a dense
projection to the feature dimension. The same weights embed every frame of
a sequence, so a [T, H, W] stack goes through as one batch.
"""

from __future__ import annotations

import numpy as np

from ..nn_core import Conv2d, Dense, GlobalAvgPool, MaxPool2d, ReLU
from ..nn_core.compute import compute_dtype


class SpatialEncoder:
    def __init__(
        self,
        channels: tuple[int, ...],
        feature_dim: int,
        rng: np.random.Generator,
        kernel: int = 3,
    ) -> None:
        self.blocks = []
        c_prev = 1
        for c in channels:
            self.blocks.append((Conv2d(c_prev, c, kernel, rng), ReLU(), MaxPool2d()))
            c_prev = c
        self.gap = GlobalAvgPool()
        self.proj = Dense(c_prev, feature_dim, rng, init="kaiming")
        self.feature_dim = feature_dim

    def params(self):
        out = []
        for conv, _, _ in self.blocks:
            out.extend(conv.params())
        out.extend(self.proj.params())
        return out

    def forward(self, frames: np.ndarray, counter=None) -> np.ndarray:
        """Embed [T, H, W] frames into [T, feature_dim] vectors."""
        if frames.ndim != 3:
            raise ValueError(f"encoder expects [T, H, W], got shape {frames.shape}")
        x = np.asarray(frames).astype(compute_dtype(), copy=False)[:, :, :, None]
        for conv, relu, pool in self.blocks:
            x = pool.forward(relu.forward(conv.forward(x, counter), counter), counter)
        return self.proj.forward(self.gap.forward(x, counter), counter)

    def backward(self, grad_features: np.ndarray) -> np.ndarray:
        g = self.gap.backward(self.proj.backward(grad_features))
        for conv, relu, pool in reversed(self.blocks):
            g = conv.backward(relu.backward(pool.backward(g)))
        return g[:, :, :, 0]
