"""Temporal heads: conv1d classifier, recurrent heads, and the spiking head."""

from __future__ import annotations

import numpy as np

from ..nn_core import Conv1d, Dense, ReLU, TemporalMeanPool
from ..snn_engine import LifLayer
from .recurrent import GRUCell, LSTMCell


class ConvTemporalHead:
    """Two temporal convolutions, time-average pooling, and a small MLP.

    Needs the complete feature sequence; channel dim is the feature dim.
    """

    def __init__(
        self,
        feature_dim: int,
        n_classes: int,
        rng: np.random.Generator,
        channels: tuple[int, int] = (256, 128),
        kernels: tuple[int, int] = (5, 3),
        mlp_hidden: int = 128,
    ) -> None:
        self.conv1 = Conv1d(feature_dim, channels[0], kernels[0], rng)
        self.relu1 = ReLU()
        self.conv2 = Conv1d(channels[0], channels[1], kernels[1], rng)
        self.relu2 = ReLU()
        self.pool = TemporalMeanPool()
        self.hidden = Dense(channels[1], mlp_hidden, rng, init="kaiming")
        self.relu3 = ReLU()
        self.out = Dense(mlp_hidden, n_classes, rng, init="xavier")
        self.expected_len: int | None = None

    def params(self):
        return (
            self.conv1.params()
            + self.conv2.params()
            + self.hidden.params()
            + self.out.params()
        )

    def forward(self, features: np.ndarray, counter=None) -> np.ndarray:
        if self.expected_len is not None and features.shape[0] != self.expected_len:
            raise ValueError(
                f"conv head needs the full {self.expected_len}-step sequence, "
                f"got {features.shape[0]} steps"
            )
        x = features.T  # [feature_dim, T]
        x = self.relu1.forward(self.conv1.forward(x, counter), counter)
        x = self.relu2.forward(self.conv2.forward(x, counter), counter)
        x = self.pool.forward(x, counter)
        x = self.relu3.forward(self.hidden.forward(x, counter), counter)
        return self.out.forward(x, counter)

    def backward(self, grad_logits: np.ndarray) -> np.ndarray:
        g = self.relu3.backward(self.out.backward(grad_logits))
        g = self.pool.backward(self.hidden.backward(g))
        g = self.conv2.backward(self.relu2.backward(g))
        g = self.conv1.backward(self.relu1.backward(g))
        return g.T


class RecurrentHead:
    """Single recurrent layer; the last hidden state feeds the output layer."""

    def __init__(
        self,
        kind: str,
        feature_dim: int,
        n_classes: int,
        rng: np.random.Generator,
        hidden: int = 128,
    ) -> None:
        if kind == "lstm":
            self.cell = LSTMCell(feature_dim, hidden, rng)
        elif kind == "gru":
            self.cell = GRUCell(feature_dim, hidden, rng)
        else:
            raise ValueError(f"unknown recurrent head kind {kind!r}")
        self.out = Dense(hidden, n_classes, rng, init="xavier")
        self.hidden = hidden

    def params(self):
        return self.cell.params() + self.out.params()

    def forward(self, features: np.ndarray, counter=None) -> np.ndarray:
        hs = self.cell.forward_sequence(features, counter=counter)
        self._t_len = hs.shape[0]
        return self.out.forward(hs[-1], counter)

    def backward(self, grad_logits: np.ndarray) -> np.ndarray:
        dh_last = self.out.backward(grad_logits)
        dhs = np.zeros((self._t_len, self.hidden))
        dhs[-1] = dh_last
        return self.cell.backward_sequence(dhs)


class SpikingHead:
    """Stack of LIF layers; class scores are output-neuron spike counts."""

    def __init__(
        self,
        feature_dim: int,
        n_classes: int,
        rng: np.random.Generator,
        hidden: tuple[int, int] = (128, 64),
        alpha: float = 2.0,
    ) -> None:
        dims = (feature_dim, *hidden, n_classes)
        self.layers = [
            LifLayer(dims[i], dims[i + 1], rng, alpha=alpha) for i in range(len(dims) - 1)
        ]

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def set_soft(self, soft: bool) -> None:
        for layer in self.layers:
            layer.soft = soft

    def forward(self, features: np.ndarray, counter=None) -> np.ndarray:
        """Spike counts per class over the whole sequence."""
        return self.forward_spikes(features, counter=counter).sum(axis=0)

    def forward_spikes(self, features: np.ndarray, counter=None) -> np.ndarray:
        """Output-layer spike train [T, n_classes]."""
        x = features
        for layer in self.layers:
            x = layer.forward_sequence(x, counter=counter).spikes
        return x

    def backward(self, grad_counts: np.ndarray) -> np.ndarray:
        t_len = self.layers[-1]._trace[0].shape[0] if self.layers[-1]._trace else None
        if t_len is None:
            raise RuntimeError("backward called before forward")
        g = np.tile(grad_counts, (t_len, 1))  # counts are sums over time
        for layer in reversed(self.layers):
            g = layer.backward_sequence(g)
        return g

    def clamp_params(self) -> None:
        for layer in self.layers:
            layer.clamp_params()
