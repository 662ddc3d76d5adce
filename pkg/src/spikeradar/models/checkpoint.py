"""Byte-exact model serialization (SPKW container).

Layout, all little-endian:
  header:  magic "SPKW" | version u32 | model kind u32 | layer count u32
  layer:   layer kind u32 | ndim u32 | dims u32[ndim] | weights f32[prod(dims)]
           | bias_len u32 | bias f32[bias_len]
           | (LIF layers only) beta f32[n_out] | theta f32[n_out]

Layer records appear in forward order: encoder convolutions, the encoder
projection, then the head's parameterized layers. Weights are stored f32;
in-memory tensors are float64.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from ..snn_engine import LifLayer
from .heads import ConvTemporalHead, RecurrentHead, SpikingHead
from .network import ModelSpec, SequenceClassifier, build_model

_MAGIC = b"SPKW"
_VERSION = 1
_HEADER = struct.Struct("<4sIII")

MODEL_KIND_IDS = {"cnn2d1d": 0, "lstm": 1, "gru": 2, "snn": 3}
MODEL_KIND_NAMES = {v: k for k, v in MODEL_KIND_IDS.items()}

LAYER_DENSE = 1
LAYER_CONV2D = 2
LAYER_CONV1D = 3
LAYER_LSTM = 4
LAYER_GRU = 5
LAYER_LIF = 6


def _layer_records(model: SequenceClassifier):
    """(kind, weights, bias, extras) per parameterized layer in forward order."""
    records = []
    for conv, _, _ in model.encoder.blocks:
        records.append((LAYER_CONV2D, conv.w, conv.b, ()))
    records.append((LAYER_DENSE, model.encoder.proj.w, model.encoder.proj.b, ()))
    head = model.head
    if isinstance(head, ConvTemporalHead):
        records.append((LAYER_CONV1D, head.conv1.w, head.conv1.b, ()))
        records.append((LAYER_CONV1D, head.conv2.w, head.conv2.b, ()))
        records.append((LAYER_DENSE, head.hidden.w, head.hidden.b, ()))
        records.append((LAYER_DENSE, head.out.w, head.out.b, ()))
    elif isinstance(head, RecurrentHead):
        kind = LAYER_LSTM if model.spec.kind == "lstm" else LAYER_GRU
        records.append((kind, head.cell.w, head.cell.b, ()))
        records.append((LAYER_DENSE, head.out.w, head.out.b, ()))
    elif isinstance(head, SpikingHead):
        for layer in head.layers:
            records.append((LAYER_LIF, layer.w, None, (layer.beta, layer.theta)))
    else:
        raise TypeError(f"cannot serialize head type {type(head).__name__}")
    return records


def _write_f32(fh, arr: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def save_checkpoint(model: SequenceClassifier, dest) -> None:
    """Write the model to a path or a binary file-like object."""
    records = _layer_records(model)
    own = isinstance(dest, (str, Path))
    fh = open(dest, "wb") if own else dest
    try:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, MODEL_KIND_IDS[model.spec.kind], len(records)))
        for kind, w, b, extras in records:
            dims = w.shape
            fh.write(struct.pack(f"<II{len(dims)}I", kind, len(dims), *dims))
            _write_f32(fh, w.values)
            if b is None:
                fh.write(struct.pack("<I", 0))
            else:
                fh.write(struct.pack("<I", b.size))
                _write_f32(fh, b.values)
            for extra in extras:
                _write_f32(fh, extra.values)
    finally:
        if own:
            fh.close()


def checkpoint_bytes(model: SequenceClassifier) -> bytes:
    buf = io.BytesIO()
    save_checkpoint(model, buf)
    return buf.getvalue()


class _Reader:
    def __init__(self, fh) -> None:
        self.fh = fh

    def exact(self, n: int) -> bytes:
        data = self.fh.read(n)
        if len(data) != n:
            raise ValueError("truncated checkpoint")
        return data

    def u32(self) -> int:
        return struct.unpack("<I", self.exact(4))[0]

    def f32(self, n: int) -> np.ndarray:
        return np.frombuffer(self.exact(4 * n), dtype="<f4").astype(np.float64)


def _read_records(reader: _Reader, n_layers: int):
    records = []
    for _ in range(n_layers):
        kind = reader.u32()
        ndim = reader.u32()
        dims = tuple(reader.u32() for _ in range(ndim))
        w = reader.f32(int(np.prod(dims))).reshape(dims)
        bias_len = reader.u32()
        b = reader.f32(bias_len) if bias_len else None
        extras = ()
        if kind == LAYER_LIF:
            n_out = dims[-1]
            extras = (reader.f32(n_out), reader.f32(n_out))
        records.append((kind, w, b, extras))
    return records


def _spec_from_records(kind_name: str, records) -> ModelSpec:
    convs = [r for r in records if r[0] == LAYER_CONV2D]
    if not convs:
        raise ValueError("checkpoint has no encoder convolutions")
    enc_channels = tuple(int(r[1].shape[-1]) for r in convs)  # weights are [c_in, k, k, c_out]
    proj = records[len(convs)]
    if proj[0] != LAYER_DENSE:
        raise ValueError("checkpoint missing encoder projection layer")
    feature_dim = int(proj[1].shape[1])
    head = records[len(convs) + 1 :]
    common = dict(feature_dim=feature_dim, enc_channels=enc_channels)
    if kind_name == "cnn2d1d":
        c1, c2 = head[0][1], head[1][1]
        hidden, out = head[2][1], head[3][1]
        return ModelSpec(
            kind=kind_name,
            n_classes=int(out.shape[1]),
            conv_channels=(int(c1.shape[0]), int(c2.shape[0])),
            conv_kernels=(int(c1.shape[2]), int(c2.shape[2])),
            mlp_hidden=int(hidden.shape[1]),
            **common,
        )
    if kind_name in ("lstm", "gru"):
        gates = 4 if kind_name == "lstm" else 3
        cell, out = head[0][1], head[1][1]
        return ModelSpec(
            kind=kind_name,
            n_classes=int(out.shape[1]),
            rnn_hidden=int(cell.shape[1]) // gates,
            **common,
        )
    if kind_name == "snn":
        dims = [int(r[1].shape[1]) for r in head]
        return ModelSpec(
            kind=kind_name,
            n_classes=dims[-1],
            snn_hidden=tuple(dims[:-1]),
            **common,
        )
    raise ValueError(f"unknown model kind {kind_name!r}")


def load_checkpoint(src) -> SequenceClassifier:
    """Read a model from a path or binary file-like; raises ValueError on bad format."""
    own = isinstance(src, (str, Path))
    fh = open(src, "rb") if own else src
    try:
        reader = _Reader(fh)
        magic, version, kind_id, n_layers = _HEADER.unpack(reader.exact(_HEADER.size))
        if magic != _MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}, expected {_MAGIC!r}")
        if version != _VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        if kind_id not in MODEL_KIND_NAMES:
            raise ValueError(f"unknown model kind id {kind_id}")
        records = _read_records(reader, n_layers)
    finally:
        if own:
            fh.close()

    kind_name = MODEL_KIND_NAMES[kind_id]
    spec = _spec_from_records(kind_name, records)
    model = build_model(spec, np.random.default_rng(0))
    if kind_name == "cnn2d1d":
        # the container does not carry the trained sequence length
        model.head.expected_len = None
    expected = _layer_records(model)
    if len(expected) != len(records):
        raise ValueError("layer count does not match the declared model kind")
    for (exp_kind, w, b, extras), (got_kind, wv, bv, ev) in zip(expected, records):
        if exp_kind != got_kind:
            raise ValueError("layer order does not match the declared model kind")
        if w.shape != wv.shape:
            raise ValueError("layer shape mismatch in checkpoint")
        w.values[...] = wv
        if b is not None:
            if bv is None or b.size != bv.size:
                raise ValueError("bias mismatch in checkpoint")
            b.values[...] = bv
        for tensor, arr in zip(extras, ev):
            tensor.values[...] = arr
    return model
