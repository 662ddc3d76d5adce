"""Dense FLOP counting, data-dependent effective-FLOP counting, memory report.

Both metrics share one op inventory: the layers' forward passes emit a
callback per arithmetic block, and two counter implementations interpret
them. Conventions, applied identically on both sides:

  - A multiply-accumulate chain (dense, conv, recurrent gate projections)
    initializes its accumulator with the bias; each (input, weight) pair
    then costs one multiplication and one addition, so a dense layer costs
    2 * n_in * n_out.
  - Effective counting excludes a multiplication when either operand is
    exactly zero and an addition when both operands are exactly zero, so a
    multiply-accumulate pair is counted exactly when both the input element
    and the weight element are nonzero.
  - Reductions (average pooling) cost one addition per accumulated element
    plus one multiplication per output for the normalization.
  - Pointwise data-independent work (activations, max-pool selection, gate
    nonlinearities) costs one op per element under both metrics.
  - One LIF timestep costs 2 multiplications and 2 additions per neuron:
    decay, integration, spike-scaled threshold, subtractive reset.

Per-frame attribution divides a full forward pass over a 15-step sequence
by 15: frame-repeated encoder work averages out and sequence-wide head work
is spread across the frames it consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelSpec, SequenceClassifier, build_model
from .radar_dsp import RdSequence


class DenseOpCounter:
    """Counts every op the forward pass declares, independent of the data."""

    def __init__(self) -> None:
        self.total = 0.0

    def matmul(self, a: np.ndarray, b: np.ndarray) -> None:
        m, k = a.shape
        n = b.shape[1]
        self.total += 2.0 * m * k * n

    def ewise_mul(self, a, b) -> None:
        self.total += float(np.broadcast(a, b).size)

    def ewise_add(self, a, b) -> None:
        self.total += float(np.broadcast(a, b).size)

    def reduce_sum(self, x: np.ndarray) -> None:
        self.total += float(x.size)

    def scale(self, x: np.ndarray) -> None:
        self.total += float(x.size)

    def pointwise(self, n: int) -> None:
        self.total += float(n)


class EffectiveOpCounter:
    """Counts ops surviving the zero-operand exclusion rules on actual data."""

    def __init__(self) -> None:
        self.total = 0.0

    def matmul(self, a: np.ndarray, b: np.ndarray) -> None:
        nz_a = (a != 0.0).astype(np.float64)
        nz_b = (b != 0.0).astype(np.float64)
        pairs = float(nz_a.sum(axis=0) @ nz_b.sum(axis=1))
        self.total += 2.0 * pairs

    def ewise_mul(self, a, b) -> None:
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        self.total += float(np.count_nonzero((a != 0.0) & (b != 0.0)))

    def ewise_add(self, a, b) -> None:
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        self.total += float(np.count_nonzero((a != 0.0) | (b != 0.0)))

    def reduce_sum(self, x: np.ndarray) -> None:
        self.total += float(np.count_nonzero(x))

    def scale(self, x: np.ndarray) -> None:
        self.total += float(np.count_nonzero(x))

    def pointwise(self, n: int) -> None:
        self.total += float(n)


def count_flops(spec: ModelSpec) -> float:
    """Architecture-determined FLOPs of one forward pass, per input frame."""
    model = build_model(spec, np.random.default_rng(0))
    dummy = np.ones((spec.seq_len, spec.input_hw, spec.input_hw))
    counter = DenseOpCounter()
    model.forward(dummy, counter=counter)
    return counter.total / spec.seq_len


def count_eflops(model: SequenceClassifier, seq) -> float:
    """Effective FLOPs of one forward pass on this input, per frame."""
    maps = seq.maps if isinstance(seq, RdSequence) else np.asarray(seq)
    counter = EffectiveOpCounter()
    model.forward(maps, counter=counter)
    return counter.total / maps.shape[0]


def eflops_stats(model: SequenceClassifier, seqs) -> tuple[float, float]:
    """Mean and (population) std of per-frame effective FLOPs over an input set."""
    if not len(seqs):
        raise ValueError("need at least one input to profile")
    vals = np.array([count_eflops(model, s) for s in seqs])
    return float(vals.mean()), float(vals.std())


def param_count(model: SequenceClassifier) -> int:
    return model.n_parameters()


def params_mb(model: SequenceClassifier) -> float:
    """Learnable-parameter footprint at 32-bit storage, in MiB."""
    return 4.0 * model.n_parameters() / 2.0**20


def input_mb(input_hw: int = 128, frames: int = 1) -> float:
    """Input footprint of f32 RD maps, in MiB."""
    return 4.0 * frames * input_hw * input_hw / 2.0**20


def memory_report(model: SequenceClassifier) -> dict[str, float]:
    """Parameter and input footprints of a model at 32-bit storage."""
    hw = model.spec.input_hw
    return {
        "params_mb": params_mb(model),
        "input_frame_mb": input_mb(hw, 1),
        "input_sequence_mb": input_mb(hw, model.spec.seq_len),
    }


@dataclass
class ComplexityReport:
    flops_per_frame: float
    eflops_mean: float
    eflops_std: float
    params_mb: float
    input_mb: float
    n_inputs: int

    def lines(self) -> list[str]:
        return [
            f"flops_per_frame={self.flops_per_frame:.0f}",
            f"eflops_mean={self.eflops_mean:.3f}",
            f"eflops_std={self.eflops_std:.3f}",
            f"params_mb={self.params_mb:.6f}",
            f"input_mb={self.input_mb:.6f}",
            f"n_inputs={self.n_inputs}",
        ]


def profile_model(model: SequenceClassifier, seqs) -> ComplexityReport:
    mean, std = eflops_stats(model, seqs)
    return ComplexityReport(
        flops_per_frame=count_flops(model.spec),
        eflops_mean=mean,
        eflops_std=std,
        params_mb=params_mb(model),
        input_mb=input_mb(model.spec.input_hw),
        n_inputs=len(seqs),
    )


def write_report(report: ComplexityReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in report.lines():
            fh.write(line + "\n")
