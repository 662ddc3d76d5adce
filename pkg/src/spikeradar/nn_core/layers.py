"""Layers with explicit forward/backward passes.

Every layer caches what its backward pass needs; parameter gradients
accumulate into the Tensor grad buffers until explicitly zeroed. The
optional `counter` argument receives one callback per arithmetic block of
the forward pass, which is how the complexity profiler counts work without
a second forward implementation.
"""

from __future__ import annotations

import numpy as np

from .compute import compute_dtype
from .tensor import Tensor, kaiming_uniform, xavier_uniform


class Layer:
    """Base class: parameter listing plus the forward-before-backward contract."""

    def params(self) -> list[Tensor]:
        return []

    def _take_cache(self, name: str = "_cache"):
        cache = getattr(self, name, None)
        if cache is None:
            raise RuntimeError(f"{type(self).__name__}.backward called before forward")
        setattr(self, name, None)
        return cache


class Dense(Layer):
    """Affine map y = x @ W + b for inputs shaped [in] or [batch, in]."""

    def __init__(
        self,
        n_in: int,
        n_out: int,
        rng: np.random.Generator,
        init: str = "kaiming",
        bias: bool = True,
    ) -> None:
        if init == "kaiming":
            self.w = kaiming_uniform((n_in, n_out), n_in, rng)
        elif init == "xavier":
            self.w = xavier_uniform((n_in, n_out), n_in, n_out, rng)
        else:
            raise ValueError(f"unknown init {init!r}")
        self.b = Tensor(np.zeros(n_out)) if bias else None
        self.n_in = n_in
        self.n_out = n_out
        self._cache = None

    def params(self) -> list[Tensor]:
        return [self.w] + ([self.b] if self.b is not None else [])

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        cdt = compute_dtype()
        x = np.asarray(x).astype(cdt, copy=False)
        if x.shape[-1] != self.n_in:
            raise ValueError(
                f"Dense expected last dim {self.n_in}, got input shape {x.shape}"
            )
        squeeze = x.ndim == 1
        x2d = x[None, :] if squeeze else x
        wv = self.w.values.astype(cdt, copy=False)
        if counter is not None:
            counter.matmul(x2d, wv)
        y = x2d @ wv
        if self.b is not None:
            y = y + self.b.values.astype(cdt, copy=False)
        self._cache = (x2d, wv, squeeze)
        return y[0] if squeeze else y

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x2d, wv, squeeze = self._take_cache()
        g = np.asarray(grad_out).astype(x2d.dtype, copy=False)
        g2d = g[None, :] if squeeze else g
        self.w.grad += x2d.T @ g2d
        if self.b is not None:
            self.b.grad += g2d.sum(axis=0)
        gx = g2d @ wv.T
        return gx[0] if squeeze else gx


class Conv2d(Layer):
    """Cross-correlation, stride 1, zero "same" padding, channels-last [N, H, W, C].

    Weights are stored [c_in, k, k, c_out] so the im2col matrix and the
    weight matrix reshape without copies.
    """

    def __init__(
        self, c_in: int, c_out: int, kernel: int, rng: np.random.Generator
    ) -> None:
        if kernel % 2 != 1:
            raise ValueError("Conv2d supports odd kernels only (same padding)")
        fan_in = c_in * kernel * kernel
        self.w = kaiming_uniform((c_in, kernel, kernel, c_out), fan_in, rng)
        self.b = Tensor(np.zeros(c_out))
        self.c_in = c_in
        self.c_out = c_out
        self.kernel = kernel
        self._cache = None

    def params(self) -> list[Tensor]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        if x.ndim != 4 or x.shape[3] != self.c_in:
            raise ValueError(
                f"Conv2d expected [N, H, W, {self.c_in}], got shape {x.shape}"
            )
        cdt = compute_dtype()
        x = np.asarray(x).astype(cdt, copy=False)
        n, h, w, _ = x.shape
        k, p = self.kernel, self.kernel // 2
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
        # [N, OH, OW, C, k, k] view -> [N*OH*OW, C*k*k] with a single copy
        view = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))
        cols = view.reshape(n * h * w, self.c_in * k * k)
        wmat = self.w.values.astype(cdt, copy=False).reshape(-1, self.c_out)
        if counter is not None:
            counter.matmul(cols, wmat)
        y = cols @ wmat + self.b.values.astype(cdt, copy=False)
        self._cache = (cols, wmat, (n, h, w))
        return y.reshape(n, h, w, self.c_out)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        cols, wmat, (n, h, w) = self._take_cache()
        k, p = self.kernel, self.kernel // 2
        g = np.ascontiguousarray(grad_out, dtype=cols.dtype).reshape(
            n * h * w, self.c_out
        )
        self.w.grad += (cols.T @ g).reshape(self.w.shape)
        self.b.grad += g.sum(axis=0)
        dcols = (g @ wmat.T).reshape(n, h, w, self.c_in, k, k)
        dxp = np.zeros((n, h + 2 * p, w + 2 * p, self.c_in), dtype=cols.dtype)
        for i in range(k):
            for j in range(k):
                dxp[:, i : i + h, j : j + w, :] += dcols[:, :, :, :, i, j]
        return dxp[:, p : p + h, p : p + w, :]


class Conv1d(Layer):
    """Temporal cross-correlation over [channels, time], stride 1, same padding."""

    def __init__(
        self, c_in: int, c_out: int, kernel: int, rng: np.random.Generator
    ) -> None:
        if kernel % 2 != 1:
            raise ValueError("Conv1d supports odd kernels only (same padding)")
        self.w = kaiming_uniform((c_out, c_in, kernel), c_in * kernel, rng)
        self.b = Tensor(np.zeros(c_out))
        self.c_in = c_in
        self.c_out = c_out
        self.kernel = kernel
        self._cache = None

    def params(self) -> list[Tensor]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        if x.ndim != 2 or x.shape[0] != self.c_in:
            raise ValueError(f"Conv1d expected [{self.c_in}, T], got shape {x.shape}")
        cdt = compute_dtype()
        x = np.asarray(x).astype(cdt, copy=False)
        t = x.shape[1]
        k, p = self.kernel, self.kernel // 2
        xp = np.pad(x, ((0, 0), (p, p)))
        cols = np.empty((t, self.c_in, k), dtype=cdt)
        for j in range(k):
            cols[:, :, j] = xp[:, j : j + t].T
        cols = cols.reshape(t, self.c_in * k)
        wmat = self.w.values.astype(cdt, copy=False).reshape(self.c_out, -1).T
        if counter is not None:
            counter.matmul(cols, wmat)
        y = cols @ wmat + self.b.values.astype(cdt, copy=False)  # [T, c_out]
        self._cache = (cols, wmat, t)
        return y.T

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        cols, wmat, t = self._take_cache()
        k, p = self.kernel, self.kernel // 2
        g = grad_out.T.astype(cols.dtype, copy=False)  # [T, c_out]
        self.w.grad += (cols.T @ g).T.reshape(self.w.shape)
        self.b.grad += g.sum(axis=0)
        dcols = (g @ wmat.T).reshape(t, self.c_in, k)
        dxp = np.zeros((self.c_in, t + 2 * p), dtype=cols.dtype)
        for j in range(k):
            dxp[:, j : j + t] += dcols[:, :, j].T
        return dxp[:, p : p + t]


class MaxPool2d(Layer):
    """Non-overlapping 2x2 max pooling on [N, H, W, C]; spatial dims must be even."""

    def __init__(self) -> None:
        self._cache = None

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"MaxPool2d needs even spatial dims, got {x.shape}")
        windows = np.stack(
            (x[:, 0::2, 0::2], x[:, 0::2, 1::2], x[:, 1::2, 0::2], x[:, 1::2, 1::2]),
            axis=-1,
        )  # [N, H/2, W/2, C, 4]
        idx = windows.argmax(axis=-1)
        out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
        if counter is not None:
            counter.pointwise(out.size)
        self._cache = (idx, (n, h, w, c))
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        idx, (n, h, w, c) = self._take_cache()
        dx = np.zeros((n, h, w, c), dtype=np.asarray(grad_out).dtype)
        quads = (
            dx[:, 0::2, 0::2],
            dx[:, 0::2, 1::2],
            dx[:, 1::2, 0::2],
            dx[:, 1::2, 1::2],
        )
        for q, view in enumerate(quads):
            view += np.where(idx == q, grad_out, 0.0)
        return dx


class GlobalAvgPool(Layer):
    """Mean over the spatial dims: [N, H, W, C] -> [N, C]."""

    def __init__(self) -> None:
        self._cache = None

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        n, h, w, c = x.shape
        if counter is not None:
            counter.reduce_sum(x.reshape(n, h * w * c))
        out = x.sum(axis=(1, 2))
        if counter is not None:
            counter.scale(out)
        out = out / (h * w)
        self._cache = (n, h, w, c)
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        n, h, w, c = self._take_cache()
        return np.broadcast_to(
            grad_out[:, None, None, :] / (h * w), (n, h, w, c)
        ).copy()


class TemporalMeanPool(Layer):
    """Mean over the time axis: [C, T] -> [C]."""

    def __init__(self) -> None:
        self._cache = None

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        if counter is not None:
            counter.reduce_sum(x)
        out = x.sum(axis=1)
        if counter is not None:
            counter.scale(out)
        self._cache = x.shape
        return out / x.shape[1]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        c, t = self._take_cache()
        return np.broadcast_to(grad_out[:, None] / t, (c, t)).copy()


class ReLU(Layer):
    def __init__(self) -> None:
        self._cache = None

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        if counter is not None:
            counter.pointwise(x.size)
        mask = x > 0
        self._cache = mask
        return np.where(mask, x, 0.0)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        mask = self._take_cache()
        return np.where(mask, grad_out, 0.0)


class Sigmoid(Layer):
    def __init__(self) -> None:
        self._cache = None

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        if counter is not None:
            counter.pointwise(x.size)
        y = sigmoid(x)
        self._cache = y
        return y

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        y = self._take_cache()
        return grad_out * y * (1.0 - y)


class Tanh(Layer):
    def __init__(self) -> None:
        self._cache = None

    def forward(self, x: np.ndarray, counter=None) -> np.ndarray:
        if counter is not None:
            counter.pointwise(x.size)
        y = np.tanh(x)
        self._cache = y
        return y

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        y = self._take_cache()
        return grad_out * (1.0 - y * y)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
