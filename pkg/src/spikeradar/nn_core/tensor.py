"""Parameter container: an n-d array with a lazily allocated gradient buffer."""

from __future__ import annotations

import math

import numpy as np


class Tensor:
    """Float64 value buffer plus a same-shaped gradient buffer.

    The gradient buffer is allocated on first access and accumulated into by
    layer backward passes; call zero_grad() between optimizer steps.
    """

    __slots__ = ("values", "_grad")

    def __init__(self, values) -> None:
        self.values = np.asarray(values, dtype=np.float64)
        self._grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            self._grad = np.zeros_like(self.values)
        return self._grad

    @grad.setter
    def grad(self, value) -> None:
        value = np.asarray(value, dtype=np.float64)
        if value.shape != self.values.shape:
            raise ValueError(
                f"gradient shape {value.shape} != parameter shape {self.values.shape}"
            )
        self._grad = value

    def zero_grad(self) -> None:
        if self._grad is not None:
            self._grad.fill(0.0)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"


def kaiming_uniform(shape: tuple[int, ...], fan_in: int, rng: np.random.Generator) -> Tensor:
    """He-style uniform init for layers feeding ReLU paths."""
    bound = math.sqrt(6.0 / fan_in)
    return Tensor(rng.uniform(-bound, bound, shape))


def xavier_uniform(
    shape: tuple[int, ...], fan_in: int, fan_out: int, rng: np.random.Generator
) -> Tensor:
    """Glorot-style uniform init for gate and output layers."""
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-bound, bound, shape))
