"""LSTM and GRU cells with hand-written backpropagation through time.

Both cells store all gate weights in a single [(n_in + n_hidden), gates]
tensor (input rows first) plus one bias vector, which is also the layout
used by the checkpoint format.
"""

from __future__ import annotations

import numpy as np

from ..nn_core import Tensor, xavier_uniform
from ..nn_core.compute import compute_dtype
from ..nn_core.layers import sigmoid


class LSTMCell:
    """Single-layer LSTM; gate order along the weight columns is [i, f, g, o]."""

    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator) -> None:
        self.w = xavier_uniform((n_in + n_hidden, 4 * n_hidden), n_in + n_hidden, n_hidden, rng)
        self.b = Tensor(np.zeros(4 * n_hidden))
        self.b.values[n_hidden : 2 * n_hidden] = 1.0  # forget-gate bias: remember
        self.n_in = n_in
        self.n_hidden = n_hidden
        self._trace = None

    def params(self) -> list[Tensor]:
        return [self.w, self.b]

    def forward_sequence(self, xs: np.ndarray, counter=None) -> np.ndarray:
        """Run T steps from zero state; returns hidden states [T, n_hidden]."""
        cdt = compute_dtype()
        xs = np.asarray(xs).astype(cdt, copy=False)
        wv = self.w.values.astype(cdt, copy=False)
        bv = self.b.values.astype(cdt, copy=False)
        t_len = xs.shape[0]
        nh = self.n_hidden
        h = np.zeros(nh, dtype=cdt)
        c = np.zeros(nh, dtype=cdt)
        hs = np.empty((t_len, nh), dtype=cdt)
        steps = []
        for t in range(t_len):
            xh = np.concatenate([xs[t], h])
            if counter is not None:
                counter.matmul(xh[None, :], wv)
                counter.pointwise(4 * nh)  # gate nonlinearities
            z = xh @ wv + bv
            i = sigmoid(z[:nh])
            f = sigmoid(z[nh : 2 * nh])
            g = np.tanh(z[2 * nh : 3 * nh])
            o = sigmoid(z[3 * nh :])
            c_prev = c
            if counter is not None:
                counter.ewise_mul(f, c_prev)
                counter.ewise_mul(i, g)
                counter.ewise_add(f * c_prev, i * g)
                counter.pointwise(nh)  # tanh(c)
            c = f * c_prev + i * g
            tc = np.tanh(c)
            if counter is not None:
                counter.ewise_mul(o, tc)
            h = o * tc
            hs[t] = h
            steps.append((xh, c_prev, i, f, g, o, c, tc))
        self._trace = (xs.shape, wv, steps)
        return hs

    def backward_sequence(self, grad_hs: np.ndarray) -> np.ndarray:
        """BPTT given dLoss/dHidden [T, n_hidden]; returns dLoss/dInputs."""
        if self._trace is None:
            raise RuntimeError("backward_sequence called before forward_sequence")
        (t_len, n_in), wv, steps = self._trace
        self._trace = None
        nh = self.n_hidden
        grad_hs = np.asarray(grad_hs).astype(wv.dtype, copy=False)
        dxs = np.empty((t_len, n_in), dtype=wv.dtype)
        dh_next = np.zeros(nh, dtype=wv.dtype)
        dc_next = np.zeros(nh, dtype=wv.dtype)
        for t in range(t_len - 1, -1, -1):
            xh, c_prev, i, f, g, o, c, tc = steps[t]
            dh = grad_hs[t] + dh_next
            do = dh * tc
            dc = dc_next + dh * o * (1.0 - tc * tc)
            di = dc * g
            dg = dc * i
            df = dc * c_prev
            dc_next = dc * f
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g * g),
                    do * o * (1.0 - o),
                ]
            )
            self.w.grad += np.outer(xh, dz)
            self.b.grad += dz
            dxh = dz @ wv.T
            dxs[t] = dxh[:n_in]
            dh_next = dxh[n_in:]
        return dxs


class GRUCell:
    """Single-layer GRU with the reset gate applied to the projected hidden state.

    Gate order is [r, z, n]; candidate n = tanh(a_n + r * (h_prev @ Wh)_n),
    h = (1 - z) * n + z * h_prev.
    """

    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator) -> None:
        self.w = xavier_uniform((n_in + n_hidden, 3 * n_hidden), n_in + n_hidden, n_hidden, rng)
        self.b = Tensor(np.zeros(3 * n_hidden))
        self.b.values[n_hidden : 2 * n_hidden] = 1.0  # update-gate bias: remember
        self.n_in = n_in
        self.n_hidden = n_hidden
        self._trace = None

    def params(self) -> list[Tensor]:
        return [self.w, self.b]

    def forward_sequence(self, xs: np.ndarray, counter=None) -> np.ndarray:
        cdt = compute_dtype()
        xs = np.asarray(xs).astype(cdt, copy=False)
        t_len = xs.shape[0]
        nh, n_in = self.n_hidden, self.n_in
        wc = self.w.values.astype(cdt, copy=False)
        bv = self.b.values.astype(cdt, copy=False)
        wx = wc[:n_in]
        wh = wc[n_in:]
        h = np.zeros(nh, dtype=cdt)
        hs = np.empty((t_len, nh), dtype=cdt)
        steps = []
        for t in range(t_len):
            if counter is not None:
                counter.matmul(xs[t][None, :], wx)
                counter.matmul(h[None, :], wh)
                counter.pointwise(3 * nh)  # gate nonlinearities
            a = xs[t] @ wx + bv
            bh = h @ wh
            r = sigmoid(a[:nh] + bh[:nh])
            z = sigmoid(a[nh : 2 * nh] + bh[nh : 2 * nh])
            if counter is not None:
                counter.ewise_mul(r, bh[2 * nh :])
            n = np.tanh(a[2 * nh :] + r * bh[2 * nh :])
            h_prev = h
            if counter is not None:
                counter.ewise_mul(1.0 - z, n)
                counter.ewise_mul(z, h_prev)
                counter.ewise_add((1.0 - z) * n, z * h_prev)
                counter.pointwise(nh)  # 1 - z
            h = (1.0 - z) * n + z * h_prev
            hs[t] = h
            steps.append((xs[t], h_prev, bh, r, z, n))
        self._trace = (xs.shape, wc, steps)
        return hs

    def backward_sequence(self, grad_hs: np.ndarray) -> np.ndarray:
        if self._trace is None:
            raise RuntimeError("backward_sequence called before forward_sequence")
        (t_len, n_in), wc, steps = self._trace
        self._trace = None
        nh = self.n_hidden
        grad_hs = np.asarray(grad_hs).astype(wc.dtype, copy=False)
        wx = wc[:n_in]
        wh = wc[n_in:]
        dxs = np.empty((t_len, n_in), dtype=wc.dtype)
        dh_next = np.zeros(nh, dtype=wc.dtype)
        for t in range(t_len - 1, -1, -1):
            x, h_prev, bh, r, z, n = steps[t]
            dh = grad_hs[t] + dh_next
            dz = dh * (h_prev - n)
            dn = dh * (1.0 - z)
            dh_prev = dh * z
            dpre_n = dn * (1.0 - n * n)
            dr = dpre_n * bh[2 * nh :]
            dbh_n = dpre_n * r
            dpre_r = dr * r * (1.0 - r)
            dpre_z = dz * z * (1.0 - z)
            da = np.concatenate([dpre_r, dpre_z, dpre_n])
            dbh = np.concatenate([dpre_r, dpre_z, dbh_n])
            self.w.grad[:n_in] += np.outer(x, da)
            self.w.grad[n_in:] += np.outer(h_prev, dbh)
            self.b.grad += da
            dxs[t] = da @ wx.T
            dh_next = dh_prev + dbh @ wh.T
        return dxs
