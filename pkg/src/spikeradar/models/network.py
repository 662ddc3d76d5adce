"""Model assembly: spec, classifier wrapper, and parameter bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..nn_core import Tensor, softmax_ce
from ..nn_core.compute import compute_dtype
from ..snn_engine import spike_rate_loss
from .encoder import SpatialEncoder
from .heads import ConvTemporalHead, RecurrentHead, SpikingHead

MODEL_KINDS = ("cnn2d1d", "lstm", "gru", "snn")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description; defaults give the full-size models."""

    kind: str
    n_classes: int = 4
    feature_dim: int = 512
    seq_len: int = 15
    input_hw: int = 128
    enc_channels: tuple[int, ...] = (16, 32, 64, 128)
    conv_channels: tuple[int, int] = (256, 128)
    conv_kernels: tuple[int, int] = (5, 3)
    mlp_hidden: int = 128
    rnn_hidden: int = 128
    snn_hidden: tuple[int, int] = (128, 64)
    surrogate_alpha: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.n_classes < 2:
            raise ValueError("need at least two classes")


class SequenceClassifier:
    """Spatial encoder plus one temporal head, trained end to end.

    forward() maps a [T, H, W] map stack to class scores: logits for the ANN
    heads, output spike counts for the spiking head.
    """

    def __init__(self, spec: ModelSpec, encoder: SpatialEncoder, head) -> None:
        self.spec = spec
        self.encoder = encoder
        self.head = head

    # -- parameters ---------------------------------------------------------

    def parameters(self) -> list[Tensor]:
        return self.encoder.params() + self.head.params()

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        names: list[tuple[str, Tensor]] = []
        for i, (conv, _, _) in enumerate(self.encoder.blocks):
            names.append((f"encoder.conv{i}.w", conv.w))
            names.append((f"encoder.conv{i}.b", conv.b))
        names.append(("encoder.proj.w", self.encoder.proj.w))
        names.append(("encoder.proj.b", self.encoder.proj.b))
        head = self.head
        if isinstance(head, ConvTemporalHead):
            names += [
                ("head.conv1.w", head.conv1.w),
                ("head.conv1.b", head.conv1.b),
                ("head.conv2.w", head.conv2.w),
                ("head.conv2.b", head.conv2.b),
                ("head.hidden.w", head.hidden.w),
                ("head.hidden.b", head.hidden.b),
                ("head.out.w", head.out.w),
                ("head.out.b", head.out.b),
            ]
        elif isinstance(head, RecurrentHead):
            names += [
                ("head.cell.w", head.cell.w),
                ("head.cell.b", head.cell.b),
                ("head.out.w", head.out.w),
                ("head.out.b", head.out.b),
            ]
        elif isinstance(head, SpikingHead):
            for i, layer in enumerate(head.layers):
                names += [
                    (f"head.lif{i}.w", layer.w),
                    (f"head.lif{i}.beta", layer.beta),
                    (f"head.lif{i}.theta", layer.theta),
                ]
        else:
            raise TypeError(f"unknown head type {type(head).__name__}")
        return names

    def prunable_parameters(self) -> list[tuple[str, Tensor]]:
        """Connection weights only: biases and LIF beta/theta stay dense."""
        return [
            (name, p)
            for name, p in self.named_parameters()
            if name.endswith(".w")
        ]

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    # -- compute ------------------------------------------------------------

    def forward(self, maps: np.ndarray, counter=None) -> np.ndarray:
        maps = np.asarray(maps, dtype=np.float64)
        features = self.encoder.forward(maps, counter=counter)
        return self.head.forward(features, counter=counter)

    def loss_and_backward(self, maps: np.ndarray, label: int) -> float:
        """Forward, loss, and full backward; gradients accumulate."""
        scores = self.forward(maps)
        if self.spec.kind == "snn":
            loss, dscores = spike_rate_loss(scores, label)
        else:
            loss, dscores = softmax_ce(scores, label)
        dfeatures = self.head.backward(dscores.astype(compute_dtype(), copy=False))
        self.encoder.backward(dfeatures)
        return loss

    def predict(self, maps: np.ndarray) -> tuple[int, np.ndarray]:
        """(label, class scores); ties resolve to the lowest class index."""
        scores = self.forward(maps)
        return int(np.argmax(scores)), scores

    def spike_train(self, maps: np.ndarray) -> np.ndarray:
        """Output spike raster [T, n_classes]; spiking head only."""
        if self.spec.kind != "snn":
            raise ValueError(f"{self.spec.kind!r} model has no spike train")
        features = self.encoder.forward(np.asarray(maps, dtype=np.float64))
        return self.head.forward_spikes(features)

    def set_soft(self, soft: bool) -> None:
        if self.spec.kind != "snn":
            raise ValueError("soft mode applies to the spiking head only")
        self.head.set_soft(soft)

    def clamp_dynamics(self) -> None:
        """Clamp LIF beta/theta after an optimizer step (no-op for ANN heads)."""
        if isinstance(self.head, SpikingHead):
            self.head.clamp_params()

    def state_arrays(self) -> list[np.ndarray]:
        return [p.values.copy() for p in self.parameters()]

    def load_state_arrays(self, arrays: list[np.ndarray]) -> None:
        params = self.parameters()
        if len(arrays) != len(params):
            raise ValueError("state array count mismatch")
        for p, a in zip(params, arrays):
            if p.values.shape != a.shape:
                raise ValueError("state array shape mismatch")
            p.values[...] = a


def build_model(spec: ModelSpec, rng: np.random.Generator) -> SequenceClassifier:
    encoder = SpatialEncoder(spec.enc_channels, spec.feature_dim, rng)
    if spec.kind == "cnn2d1d":
        head = ConvTemporalHead(
            spec.feature_dim,
            spec.n_classes,
            rng,
            channels=spec.conv_channels,
            kernels=spec.conv_kernels,
            mlp_hidden=spec.mlp_hidden,
        )
        head.expected_len = spec.seq_len
    elif spec.kind in ("lstm", "gru"):
        head = RecurrentHead(
            spec.kind, spec.feature_dim, spec.n_classes, rng, hidden=spec.rnn_hidden
        )
    else:
        head = SpikingHead(
            spec.feature_dim,
            spec.n_classes,
            rng,
            hidden=spec.snn_hidden,
            alpha=spec.surrogate_alpha,
        )
    return SequenceClassifier(spec, encoder, head)
