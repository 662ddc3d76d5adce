"""Leaky integrate-and-fire layers with learnable decay and threshold.

Membrane update per timestep: U <- beta * U + I, spike where U >= theta,
then reset by subtraction U <- U - S * theta. Backpropagation through time
replaces the Heaviside spike derivative with a normalized arctan
pseudo-derivative; gradients flow through both the decay path and the reset
path, and reach beta and theta as learnable per-neuron parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nn_core import Tensor, softmax_ce, xavier_uniform
from .nn_core.compute import compute_dtype

BETA_MIN = 0.001
BETA_MAX = 0.999
THETA_MIN = 0.01


def surrogate_spike_grad(x, alpha: float = 2.0):
    """Pseudo-derivative of the spike nonlinearity at membrane excess x = U - theta.

    g(x) = (alpha/2) / (1 + (pi * alpha * x / 2)^2): positive everywhere,
    peaks at g(0) = alpha/2, symmetric, and integrates to 1 for any alpha.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    z = 0.5 * math.pi * alpha * np.asarray(x)
    return (0.5 * alpha) / (1.0 + z * z)


def soft_spike(x, alpha: float = 2.0):
    """Differentiable spike relaxation whose derivative is surrogate_spike_grad.

    Maps (-inf, inf) to (0, 1) with value 0.5 at threshold; sharpens to the
    Heaviside step as alpha grows.
    """
    z = 0.5 * math.pi * alpha * np.asarray(x)
    return 0.5 + np.arctan(z) / math.pi


@dataclass
class SpikeRecord:
    """Spike raster of one sequence pass plus per-neuron totals."""

    spikes: np.ndarray  # [T, n_out]; binary in hard mode
    counts: np.ndarray  # [n_out] column sums
    membrane: np.ndarray | None = None  # [T, n_out] pre-spike membrane, if kept


class LifLayer:
    """Dense synapses into a row of LIF neurons with per-neuron beta and theta.

    Input arrives as direct current I = x @ W (no spike encoding, no bias).
    State is per-sequence: call reset_state() or forward_sequence(), which
    resets implicitly. In soft mode the forward pass uses the differentiable
    relaxation instead of hard spikes, making the BPTT gradients exact.
    """

    def __init__(
        self,
        n_in: int,
        n_out: int,
        rng: np.random.Generator,
        alpha: float = 2.0,
        beta_init: float = 0.9,
        theta_init: float = 1.0,
        soft: bool = False,
    ) -> None:
        self.w = xavier_uniform((n_in, n_out), n_in, n_out, rng)
        self.beta = Tensor(np.full(n_out, beta_init))
        self.theta = Tensor(np.full(n_out, theta_init))
        self.alpha = alpha
        self.soft = soft
        self.n_in = n_in
        self.n_out = n_out
        self.u: np.ndarray | None = None
        self._last_u_pre: np.ndarray | None = None
        self._trace = None

    def params(self) -> list[Tensor]:
        return [self.w, self.beta, self.theta]

    def reset_state(self) -> None:
        self.u = np.zeros(self.n_out, dtype=compute_dtype())

    def step(self, x: np.ndarray, counter=None) -> np.ndarray:
        """Project one input vector and advance the membrane by one timestep."""
        cdt = compute_dtype()
        x = np.asarray(x).astype(cdt, copy=False)
        wv = self.w.values.astype(cdt, copy=False)
        if counter is not None:
            counter.matmul(x[None, :], wv)
        return lif_step(self, x @ wv, counter=counter)

    def forward_sequence(
        self, xs: np.ndarray, record_membrane: bool = False, counter=None
    ) -> SpikeRecord:
        """Run T timesteps from a reset state, keeping the trace for BPTT."""
        cdt = compute_dtype()
        xs = np.asarray(xs).astype(cdt, copy=False)
        t_len = xs.shape[0]
        self.reset_state()
        u_prev = np.empty((t_len, self.n_out), dtype=cdt)  # membrane entering each step
        u_pre = np.empty((t_len, self.n_out), dtype=cdt)  # membrane after integration
        spikes = np.empty((t_len, self.n_out), dtype=cdt)
        for t in range(t_len):
            u_prev[t] = self.u
            spikes[t] = self.step(xs[t], counter=counter)
            u_pre[t] = self._last_u_pre
        self._trace = (xs, u_prev, u_pre, spikes)
        return SpikeRecord(
            spikes=spikes,
            counts=spikes.sum(axis=0),
            membrane=u_pre.copy() if record_membrane else None,
        )

    def backward_sequence(self, grad_spikes: np.ndarray) -> np.ndarray:
        """BPTT given dLoss/dSpikes [T, n_out]; returns dLoss/dInputs [T, n_in].

        Accumulates gradients for the weights, beta, and theta. The spike
        surrogate is evaluated at U_pre - theta; the recurrent adjoint flows
        through both beta * U and the subtractive reset.
        """
        if self._trace is None:
            raise RuntimeError("backward_sequence called before forward_sequence")
        xs, u_prev, u_pre, spikes = self._trace
        self._trace = None
        cdt = xs.dtype
        t_len = xs.shape[0]
        grad_spikes = np.asarray(grad_spikes).astype(cdt, copy=False)
        wv = self.w.values.astype(cdt, copy=False)
        bv = self.beta.values.astype(cdt, copy=False)
        tv = self.theta.values.astype(cdt, copy=False)
        g_spk = surrogate_spike_grad(u_pre - tv, self.alpha)  # [T, n_out]

        dxs = np.empty_like(xs)
        dw = np.zeros_like(wv, shape=self.w.shape)
        dbeta = np.zeros_like(bv)
        dtheta = np.zeros_like(tv)
        lam = np.zeros(self.n_out, dtype=cdt)  # dL/dU_post at step t
        for t in range(t_len - 1, -1, -1):
            ds = grad_spikes[t] - lam * tv  # reset path: U_post = U_pre - S*theta
            du_pre = lam + ds * g_spk[t]
            dtheta += -ds * g_spk[t] - lam * spikes[t]
            dbeta += du_pre * u_prev[t]
            di = du_pre  # U_pre = beta*U_prev + I
            dw += np.outer(xs[t], di)
            dxs[t] = di @ wv.T
            lam = du_pre * bv
        self.w.grad += dw
        self.beta.grad += dbeta
        self.theta.grad += dtheta
        return dxs

    def clamp_params(self) -> None:
        """Keep the neuron dynamics valid after an optimizer step."""
        np.clip(self.beta.values, BETA_MIN, BETA_MAX, out=self.beta.values)
        np.maximum(self.theta.values, THETA_MIN, out=self.theta.values)


def lif_step(layer: LifLayer, input_current: np.ndarray, counter=None) -> np.ndarray:
    """Advance the layer's membrane by one step given the post-synaptic current."""
    if layer.u is None:
        raise RuntimeError("LifLayer state not initialized; call reset_state() first")
    cdt = layer.u.dtype
    input_current = np.asarray(input_current).astype(cdt, copy=False)
    bv = layer.beta.values.astype(cdt, copy=False)
    tv = layer.theta.values.astype(cdt, copy=False)
    if counter is not None:
        counter.ewise_mul(bv, layer.u)
    decayed = bv * layer.u
    if counter is not None:
        counter.ewise_add(decayed, input_current)
    u_pre = decayed + input_current
    if layer.soft:
        spikes = soft_spike(u_pre - tv, layer.alpha)
    else:
        spikes = (u_pre >= tv).astype(cdt)
    reset = spikes * tv
    if counter is not None:
        counter.ewise_mul(spikes, tv)
        counter.ewise_add(u_pre, reset)
    layer.u = u_pre - reset
    layer._last_u_pre = u_pre
    return spikes


def spike_rate_loss(counts: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    """Cross-entropy over per-class spike counts treated as logits.

    Returns (loss, gradient wrt counts); the gradient is the count softmax
    minus the one-hot target.
    """
    return softmax_ce(np.asarray(counts, dtype=np.float64), target)


def predict_from_prefix(model, seq, t: int) -> int:
    """Classify from the first t timesteps of the spiking model's output train.

    The label is the argmax of cumulative output spike counts after step t,
    ties broken toward the lowest class index. `model` must expose
    spike_train(maps) -> [T, n_classes].
    """
    maps = seq.maps if hasattr(seq, "maps") else np.asarray(seq)
    t_len = maps.shape[0]
    if not 1 <= t <= t_len:
        raise ValueError(f"prefix length {t} out of range [1, {t_len}]")
    spikes = model.spike_train(maps)
    counts = spikes[:t].sum(axis=0)
    return int(np.argmax(counts))
