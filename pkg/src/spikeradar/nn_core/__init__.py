from .tensor import Tensor, kaiming_uniform, xavier_uniform
from .layers import (
    Layer,
    Dense,
    Conv1d,
    Conv2d,
    MaxPool2d,
    GlobalAvgPool,
    TemporalMeanPool,
    ReLU,
    Sigmoid,
    Tanh,
    sigmoid,
)
from .losses import softmax, softmax_ce
from .optim import Adam

__all__ = [
    "Tensor",
    "kaiming_uniform",
    "xavier_uniform",
    "Layer",
    "Dense",
    "Conv1d",
    "Conv2d",
    "MaxPool2d",
    "GlobalAvgPool",
    "TemporalMeanPool",
    "ReLU",
    "Sigmoid",
    "Tanh",
    "sigmoid",
    "softmax",
    "softmax_ce",
    "Adam",
]
